#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qid/config.hpp"
#include "qid/runners.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw qid::ConfigError("config: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw qid::ConfigError("config: cannot open output file '" + path + "'");
  out << payload;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qid - quantum information diode simulator: nonreciprocal magnon "
      "dispersion, left/right OTOCs, rectification and the exact one-magnon "
      "oracle"};
  app.fallthrough(true);
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_path;
  bool as_json = false;
  app.add_option("--config", config_path, "configuration file (key = value)");
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_flag("--json", as_json, "emit JSON instead of CSV/text");

  // one flag per config key; flags override file values which override
  // defaults
  std::map<std::string, std::string> flag_values;
  for (const qid::KeyInfo& key : qid::config_keys()) {
    std::string flag = "--";
    for (const char* c = key.name; *c; ++c)
      flag += *c == '_' ? '-' : *c;
    app.add_option(flag, flag_values[key.name],
                   std::string("[") + key.section + "] " + key.help);
  }

  auto* cmd_dispersion = app.add_subcommand(
      "dispersion", "band structure and group velocities over ka in [-pi, pi]");
  auto* cmd_otoc =
      app.add_subcommand("otoc", "left/right OTOC time series (Bragg modes)");
  auto* cmd_rectify =
      app.add_subcommand("rectify", "rectification coefficient sweep over D");
  auto* cmd_lattice = app.add_subcommand(
      "lattice-otoc", "exact-oracle OTOC vs the lattice propagator formula");
  auto* cmd_validate =
      app.add_subcommand("validate", "run the full invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    qid::RunConfig cfg;
    if (!config_path.empty()) cfg = qid::parse_config(read_file(config_path));
    for (const qid::KeyInfo& key : qid::config_keys()) {
      std::string flag = "--";
      for (const char* c = key.name; *c; ++c)
        flag += *c == '_' ? '-' : *c;
      if (app.count(flag) > 0)
        qid::set_key(cfg, key.name, flag_values[key.name],
                     qid::Provenance::flag, "flag " + flag);
    }
    qid::finalize_config(cfg);

    if (cmd_dispersion->parsed()) {
      const qid::OutputTable t = qid::run_dispersion(cfg);
      write_output(out_path, as_json ? t.to_json() : t.to_csv());
      return kExitOk;
    }
    if (cmd_otoc->parsed()) {
      const qid::OutputTable t = qid::run_otoc(cfg);
      write_output(out_path, as_json ? t.to_json() : t.to_csv());
      return kExitOk;
    }
    if (cmd_rectify->parsed()) {
      const qid::OutputTable t = qid::run_rectify(cfg);
      write_output(out_path, as_json ? t.to_json() : t.to_csv());
      return kExitOk;
    }
    if (cmd_lattice->parsed()) {
      const qid::LatticeOtocRun run = qid::run_lattice_otoc(cfg);
      write_output(out_path,
                   as_json ? run.table.to_json() : run.table.to_csv());
      if (!run.pass) {
        std::cerr << "lattice-otoc: oracle/formula mismatch, max |err| = "
                  << qid::format_value(run.max_abs_error) << " >= 1e-10\n";
        return kExitValidation;
      }
      return kExitOk;
    }
    if (cmd_validate->parsed()) {
      const qid::ValidationReport report = qid::run_validate(cfg);
      write_output(out_path,
                   as_json ? report.to_json() : report.to_text());
      return report.pass() ? kExitOk : kExitValidation;
    }

    std::cerr << app.help();
    return kExitConfig;
  } catch (const qid::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
