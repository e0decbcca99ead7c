#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qid/model.hpp"

namespace qid {

/// Configuration problems exit with status 2 at the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Provenance { defaulted, file, flag, derived };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::file: return "file";
    case Provenance::flag: return "flag";
    case Provenance::derived: return "derived";
    default: return "default";
  }
}

/// Fully resolved run configuration: model parameters plus the
/// subcommand-specific run keys, with per-key provenance.
struct RunConfig {
  ModelParams model;
  std::optional<double> e_y;   ///< electric field; resolves d via g_me
  std::optional<double> zeta;  ///< explicit suppression override in (0, 1]

  int r_sites = 10;               ///< spin separation in lattice sites
  std::optional<double> t_max;    ///< time span; per-command default if unset
  std::optional<double> dt;      ///< time step; per-command default if unset
  double d_min = 0.0;            ///< rectify sweep start
  double d_max = 3.0;            ///< rectify sweep end
  int d_steps = 13;              ///< rectify sweep row count
  int n_sites = 16;              ///< oracle chain length (4..128)
  int displacement = 3;           ///< signed site displacement, lattice-otoc
  std::vector<std::pair<int, int>> pairs = {{0, 3}, {0, 13}};  ///< 0-based
  int k_steps = 201;             ///< dispersion sampling resolution

  std::map<std::string, Provenance> sources;

  Provenance source(const std::string& key) const {
    const auto it = sources.find(key);
    return it == sources.end() ? Provenance::defaulted : it->second;
  }
};

struct KeyInfo {
  const char* name;
  const char* section;  // "model" or "run"
  const char* help;
};

inline const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = {
      {"j1", "model", "nearest-neighbor exchange (> 0)"},
      {"j2", "model", "next-nearest exchange (>= 0)"},
      {"d", "model", "DMI strength; either sign"},
      {"a", "model", "unit-cell lattice constant (> 0)"},
      {"a0", "model", "magnonic-crystal period (> 0)"},
      {"n", "model", "number of spins / excited modes (>= 2)"},
      {"g_me", "model", "magnetoelectric coupling"},
      {"e_y", "model", "electric field along y; sets d = e_y * g_me"},
      {"zeta", "model", "suppression override in (0, 1]"},
      {"zeta_decay", "model", "suppression decay scale (> 0)"},
      {"r_sites", "run", "spin separation in lattice sites (>= 1)"},
      {"t_max", "run", "time span of the series / truncation time"},
      {"dt", "run", "time step"},
      {"d_min", "run", "rectify sweep: first DMI value (>= 0)"},
      {"d_max", "run", "rectify sweep: last DMI value"},
      {"d_steps", "run", "rectify sweep: number of rows (>= 1)"},
      {"n_sites", "run", "oracle chain length (4..128)"},
      {"displacement", "run", "signed site displacement for lattice-otoc"},
      {"pairs", "run", "site pairs for validation, 1-based n:m[,n:m...]"},
      {"k_steps", "run", "dispersion rows over ka in [-pi, pi] (>= 2)"},
  };
  return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& value, const std::string& key,
                           const std::string& where) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError(where + ": key '" + key + "' expects a number, got '" +
                      value + "'");
  return out;
}

inline int parse_int(const std::string& value, const std::string& key,
                     const std::string& where) {
  const std::string v = trim(value);
  char* end = nullptr;
  const long out = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError(where + ": key '" + key + "' expects an integer, got '" +
                      value + "'");
  return static_cast<int>(out);
}

// "n:m[,n:m...]", 1-based site indices.
inline std::vector<std::pair<int, int>> parse_pairs(const std::string& value,
                                                    const std::string& where) {
  std::vector<std::pair<int, int>> out;
  std::istringstream in(trim(value));
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError(where + ": key 'pairs' expects n:m entries, got '" +
                        item + "'");
    const int n = parse_int(item.substr(0, colon), "pairs", where);
    const int m = parse_int(item.substr(colon + 1), "pairs", where);
    if (n < 1 || m < 1)
      throw ConfigError(where + ": pair sites are 1-based positive indices");
    if (n == m)
      throw ConfigError(where + ": pair sites must be distinct");
    out.emplace_back(n - 1, m - 1);
  }
  if (out.empty())
    throw ConfigError(where + ": key 'pairs' expects at least one n:m entry");
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Applies one key=value assignment. `where` names the source for error
/// messages ("line 3", "flag --j1").
inline void set_key(RunConfig& cfg, const std::string& key,
                    const std::string& value, Provenance prov,
                    const std::string& where) {
  using detail::parse_double;
  using detail::parse_int;
  auto d = [&] { return parse_double(value, key, where); };
  auto i = [&] { return parse_int(value, key, where); };

  if (key == "j1") cfg.model.j1 = d();
  else if (key == "j2") cfg.model.j2 = d();
  else if (key == "d") cfg.model.d = d();
  else if (key == "a") cfg.model.a = d();
  else if (key == "a0") cfg.model.a0 = d();
  else if (key == "n") cfg.model.n = i();
  else if (key == "g_me") cfg.model.g_me = d();
  else if (key == "e_y") cfg.e_y = d();
  else if (key == "zeta") cfg.zeta = d();
  else if (key == "zeta_decay") cfg.model.zeta_decay = d();
  else if (key == "r_sites") cfg.r_sites = i();
  else if (key == "t_max") cfg.t_max = d();
  else if (key == "dt") cfg.dt = d();
  else if (key == "d_min") cfg.d_min = d();
  else if (key == "d_max") cfg.d_max = d();
  else if (key == "d_steps") cfg.d_steps = i();
  else if (key == "n_sites") cfg.n_sites = i();
  else if (key == "displacement") cfg.displacement = i();
  else if (key == "pairs") cfg.pairs = detail::parse_pairs(value, where);
  else if (key == "k_steps") cfg.k_steps = i();
  else throw ConfigError(where + ": unknown key '" + key + "'");

  cfg.sources[key] = prov;
}

/// Parses the line-oriented key = value format with '#' comments and
/// optional [model] / [run] section headers. An empty document yields the
/// default reference parameter set.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;  // empty until a header appears; then keys are checked
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line == "[model]" || line == "[run]")
        section = line.substr(1, line.size() - 2);
      else
        throw ConfigError(where + ": unknown section '" + line + "'");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key before '='");

    if (!section.empty()) {
      bool in_section = false;
      for (const KeyInfo& k : config_keys())
        if (key == k.name && section == k.section) in_section = true;
      if (!in_section) {
        for (const KeyInfo& k : config_keys())
          if (key == k.name)
            throw ConfigError(where + ": key '" + key +
                              "' does not belong to section [" + section + "]");
      }
    }
    if (!seen.insert(key).second)
      throw ConfigError(where + ": duplicate key '" + key + "'");
    set_key(cfg, key, value, Provenance::file, where);
  }
  return cfg;
}

/// Resolves d from (e_y, g_me), checks cross-key consistency and validates
/// every range. Must run once after the file and flag layers are applied.
inline void finalize_config(RunConfig& cfg) {
  if (cfg.e_y) {
    const double from_field = dmi_from_field(*cfg.e_y, cfg.model.g_me);
    if (cfg.source("d") == Provenance::file ||
        cfg.source("d") == Provenance::flag) {
      if (std::abs(cfg.model.d - from_field) > 1e-12)
        throw ConfigError("config: d = " + detail::format_double(cfg.model.d) +
                          " conflicts with e_y * g_me = " +
                          detail::format_double(from_field) +
                          " (keys 'd', 'e_y', 'g_me')");
    } else {
      cfg.model.d = from_field;
      cfg.sources["d"] = Provenance::derived;
    }
  }
  if (cfg.zeta && !(*cfg.zeta > 0.0 && *cfg.zeta <= 1.0))
    throw ConfigError("config: zeta must lie in (0, 1]");
  try {
    cfg.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.r_sites < 1) throw ConfigError("config: r_sites must be >= 1");
  if (cfg.t_max && !(*cfg.t_max > 0.0))
    throw ConfigError("config: t_max must be > 0");
  if (cfg.dt && !(*cfg.dt > 0.0)) throw ConfigError("config: dt must be > 0");
  if (cfg.d_min < 0.0) throw ConfigError("config: d_min must be >= 0");
  if (cfg.d_max < cfg.d_min)
    throw ConfigError("config: d_max must be >= d_min");
  if (cfg.d_steps < 1) throw ConfigError("config: d_steps must be >= 1");
  if (cfg.n_sites < 4 || cfg.n_sites > 128)
    throw ConfigError("config: n_sites must lie in [4, 128]");
  if (cfg.displacement == 0 || std::abs(cfg.displacement) >= cfg.n_sites)
    throw ConfigError("config: displacement must be nonzero with |displacement| < n_sites");
  // the default pairs track the configured chain size
  if (cfg.source("pairs") == Provenance::defaulted)
    cfg.pairs = {{0, 3}, {0, cfg.n_sites - 3}};
  for (const auto& [pn, pm] : cfg.pairs)
    if (pn >= cfg.n_sites || pm >= cfg.n_sites)
      throw ConfigError("config: pair site exceeds n_sites");
  if (cfg.k_steps < 2) throw ConfigError("config: k_steps must be >= 2");
}

/// Renders the resolved value of a key for metadata emission.
inline std::string render_key(const RunConfig& cfg, const std::string& key) {
  using detail::format_double;
  if (key == "j1") return format_double(cfg.model.j1);
  if (key == "j2") return format_double(cfg.model.j2);
  if (key == "d") return format_double(cfg.model.d);
  if (key == "a") return format_double(cfg.model.a);
  if (key == "a0") return format_double(cfg.model.a0);
  if (key == "n") return std::to_string(cfg.model.n);
  if (key == "g_me") return format_double(cfg.model.g_me);
  if (key == "e_y") return cfg.e_y ? format_double(*cfg.e_y) : "unset";
  if (key == "zeta")
    return cfg.zeta ? format_double(*cfg.zeta) : "model";
  if (key == "zeta_decay") return format_double(cfg.model.zeta_decay);
  if (key == "r_sites") return std::to_string(cfg.r_sites);
  if (key == "t_max") return cfg.t_max ? format_double(*cfg.t_max) : "auto";
  if (key == "dt") return cfg.dt ? format_double(*cfg.dt) : "auto";
  if (key == "d_min") return format_double(cfg.d_min);
  if (key == "d_max") return format_double(cfg.d_max);
  if (key == "d_steps") return std::to_string(cfg.d_steps);
  if (key == "n_sites") return std::to_string(cfg.n_sites);
  if (key == "displacement") return std::to_string(cfg.displacement);
  if (key == "pairs") {
    std::string out;
    for (const auto& [n, m] : cfg.pairs) {
      if (!out.empty()) out += ',';
      out += std::to_string(n + 1) + ':' + std::to_string(m + 1);
    }
    return out;
  }
  if (key == "k_steps") return std::to_string(cfg.k_steps);
  throw std::logic_error("render_key: unknown key " + key);
}

}  // namespace qid
