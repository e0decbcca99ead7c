// Acceptance harness: runs every release criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit status is the number of
// failed criteria. argv[1] (or QID_CLI) must point at the qid binary for the
// reproducibility checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "qid/config.hpp"
#include "qid/oracle.hpp"
#include "qid/otoc.hpp"
#include "qid/runners.hpp"

using namespace qid;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ModelParams reference_params() { return ModelParams{}; }

ModelParams chain_defaults(double d, int n) {
  ModelParams p;
  p.d = d;
  p.a = 1.0;
  p.n = n;
  return p;
}

// ---- criterion 1: oracle equivalence --------------------------------------

Outcome criterion_oracle_equivalence() {
  const TimeGrid grid(30.0 / 199.0, 200);
  double worst = 0.0;
  for (int n : {8, 16, 32}) {
    for (double d : {0.0, 0.5, 1.0}) {
      const ModelParams p = chain_defaults(d, n);
      const OracleChain chain(p, n);
      for (int disp : {1, -1, 3, -3, 5, -5}) {
        const LatticeOtocSeries lattice =
            lattice_propagator_otoc(p, disp, grid);
        const int probe = ((disp % n) + n) % n;
        for (std::size_t i = 0; i < lattice.times.size(); ++i) {
          const double exact = otoc_exact(chain, 0, probe, lattice.times[i]);
          worst = std::max(worst, std::abs(exact - lattice.c[i]));
        }
      }
    }
  }
  return {worst < 1e-10, "max |C_exact - 8p(1-p)| = " + fmt(worst)};
}

// ---- criterion 2: spectrum equals the dispersion ---------------------------

Outcome criterion_spectrum() {
  const int n = 64;
  const ModelParams p = chain_defaults(1.0, n);
  const OracleChain chain(p, n);
  std::vector<double> band(n);
  for (int m = 0; m < n; ++m)
    band[static_cast<std::size_t>(m)] =
        dispersion_1d(p, 2.0 * pi * m / (n * p.a), Branch::plus);
  std::sort(band.begin(), band.end());
  double worst = 0.0;
  for (int m = 0; m < n; ++m)
    worst = std::max(worst, std::abs(chain.decomposition().eigenvalues(m) -
                                     band[static_cast<std::size_t>(m)]));
  return {worst < 1e-10, "max eigenvalue deviation = " + fmt(worst)};
}

// ---- criterion 3: rectification law ----------------------------------------

Outcome criterion_rectification() {
  const std::vector<double> d_values = {0.0, 0.5, 1.0, 2.0, 3.0};
  ModelParams quad_params = reference_params();
  quad_params.d = d_values.back();
  const QuadratureSpec quad = default_quadrature(quad_params);
  const ModelParams base = reference_params();
  const std::vector<SweepRow> rows =
      sweep_rectification(base, d_values, 10.0 * base.a, quad);

  if (rows[0].r_coeff != 1.0)
    return {false, "R(0) = " + fmt(rows[0].r_coeff) + ", expected exactly 1"};
  double worst = 0.0;
  bool converged = true;
  for (const SweepRow& row : rows) {
    const double expected = std::exp(-4.0 * row.d / 5.0);
    worst = std::max(worst, std::abs(row.r_coeff - expected) / expected);
    converged = converged && row.converged;
  }
  return {worst < 1e-6 && converged,
          "max rel deviation from e^(-4D/5) = " + fmt(worst) +
              (converged ? "" : ", quadrature not converged")};
}

// ---- criterion 4: OTOC onset and peak phenomenology -------------------------

double onset_time(const std::vector<double>& t, const std::vector<double>& c) {
  double peak = 0.0;
  for (double v : c) peak = std::max(peak, v);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] > 0.01 * peak) return t[i];
  return t.back();
}

Outcome criterion_phenomenology() {
  const ModelParams p = reference_params();
  const ModeSet set = build_mode_set(p);
  const TimeGrid grid(2.0 * pi / (40.0 * detail::max_mode_frequency(set)),
                      1001);
  double onset[3], peak[3];
  bool bounded = true;
  int idx = 0;
  for (int sites : {10, 20, 30}) {
    const OtocSeries s = otoc_series(p, sites * p.a, grid);
    onset[idx] = onset_time(s.times, s.c_left);
    peak[idx] = *std::max_element(s.c_left.begin(), s.c_left.end());
    for (double v : s.c_left) bounded = bounded && v >= 0.0 && v <= 2.0;
    for (double v : s.c_right) bounded = bounded && v >= 0.0 && v <= 2.0;
    ++idx;
  }
  const double r21 = onset[1] / onset[0];
  const double r31 = onset[2] / onset[0];
  const bool ratios_ok =
      r21 >= 1.5 && r21 <= 2.5 && r31 >= 2.2 && r31 <= 3.8;
  const bool peaks_ok = peak[0] > peak[1] && peak[1] > peak[2];

  std::string detail = "onsets t* = {" + fmt(onset[0]) + ", " + fmt(onset[1]) +
                       ", " + fmt(onset[2]) + "}, ratios = {" + fmt(r21) +
                       ", " + fmt(r31) + "}, peaks = {" + fmt(peak[0]) + ", " +
                       fmt(peak[1]) + ", " + fmt(peak[2]) + "}";
  if (!ratios_ok)
    detail +=
        "; note: the r=10a series crosses the 1%-of-peak threshold during an "
        "early secondary lobe (~1.7% of peak) well before the ballistic front";
  return {ratios_ok && peaks_ok && bounded, detail};
}

// ---- criterion 5: suppression scaling --------------------------------------

Outcome criterion_suppression_scaling() {
  const ModelParams p = reference_params();
  const ModeSet set = build_mode_set(p);
  const TimeGrid grid(2.0 * pi / (40.0 * detail::max_mode_frequency(set)),
                      1001);
  const double overrides[] = {0.8, 0.6, 0.4};
  double peaks[3];
  for (int i = 0; i < 3; ++i) {
    const OtocSeries s = otoc_series(p, 10.0 * p.a, grid, overrides[i]);
    peaks[i] = *std::max_element(s.c_right.begin(), s.c_right.end());
  }
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double expected = std::pow(overrides[i] / overrides[j], 4);
      worst = std::max(worst,
                       std::abs(peaks[i] / peaks[j] - expected) / expected);
    }
  return {worst < 1e-9, "max rel deviation of peak ratios from zeta^4 = " +
                            fmt(worst)};
}

// ---- criterion 6: nonreciprocity witness -----------------------------------

Outcome criterion_nonreciprocity() {
  const TimeGrid grid(0.15, 201);
  const OracleChain chiral(chain_defaults(1.0, 32), 32);
  const double gap_d1 = asymmetry_probe(chiral, 0, 5, grid).max_gap;
  const OracleChain reciprocal(chain_defaults(0.0, 32), 32);
  const double gap_d0 = asymmetry_probe(reciprocal, 0, 5, grid).max_gap;

  std::string detail = "max gap(D=1) = " + fmt(gap_d1) +
                       " (required > 1e-3), max gap(D=0) = " + fmt(gap_d0) +
                       " (required < 1e-12)";
  if (gap_d1 <= 1e-3)
    detail +=
        "; note: on the even N=32 ring the single-harmonic chain's DMI phase "
        "is a removable gauge flux, so forward/backward magnitudes coincide; "
        "an odd ring (N=33) shows gap " +
        fmt(asymmetry_probe(OracleChain(chain_defaults(1.0, 33), 33), 0, 5,
                            grid)
                .max_gap);
  return {gap_d1 > 1e-3 && gap_d0 < 1e-12, detail};
}

// ---- criterion 7: blockade ---------------------------------------------------

Outcome criterion_blockade() {
  std::mt19937 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> usite(0, 15);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXcd state(16);
    for (int s = 0; s < 16; ++s) state(s) = complexd{gauss(rng), gauss(rng)};
    state.normalize();
    const BlockadeResult res = g2_zero(state, usite(rng));
    worst = std::max(worst, std::abs(res.g2) + std::abs(res.numerator));
  }
  return {worst == 0.0, "max |g2| over 10 random one-magnon states = " +
                            fmt(worst) + " (exact zero required)"};
}

// ---- criterion 8: derivative and frequency-matching checks ------------------

Outcome criterion_derivatives() {
  const ModelParams p = reference_params();
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-pi, pi);
  const double h = 1e-6;
  double worst_v = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double k = u(rng) / p.a;
    for (Branch b : {Branch::plus, Branch::minus}) {
      const double fd =
          (dispersion_1d(p, k + h, b) - dispersion_1d(p, k - h, b)) /
          (2.0 * h);
      worst_v = std::max(worst_v, std::abs(fd - group_velocity_1d(p, k, b)));
    }
  }
  double worst_w = 0.0;
  for (const Mode& m : build_mode_set(p).modes)
    worst_w = std::max(
        worst_w,
        std::abs(m.omega - dispersion_1d(p, m.k_minus, Branch::minus)));
  return {worst_v < 1e-8 && worst_w < 1e-12,
          "max |v_analytic - v_fd| = " + fmt(worst_v) +
              ", max |w(+D,k+) - w(-D,k-)| = " + fmt(worst_w)};
}

// ---- criterion 9: reproducibility -------------------------------------------

int run_cli(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return status < 0 ? status : WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome criterion_reproducibility(const std::string& cli) {
  namespace fs = std::filesystem;
  if (cli.empty() || !fs::exists(cli))
    return {false, "qid binary not found (pass its path as argv[1])"};

  const fs::path dir = fs::path("qid_acceptance_tmp");
  fs::create_directories(dir);
  const fs::path config = dir / "run.cfg";
  {
    std::ofstream out(config);
    out << "[model]\nn = 200\nd = 1\n[run]\nr_sites = 10\nt_max = 10\n"
           "n_sites = 8\ndisplacement = 3\nd_steps = 2\ndt = 0.02\n";
  }

  const int validate_status =
      run_cli(cli + " validate --out " + (dir / "validate.txt").string());
  if (validate_status != 0)
    return {false,
            "validate exited with status " + std::to_string(validate_status)};

  for (const std::string sub :
       {"dispersion", "otoc", "rectify", "lattice-otoc"}) {
    const fs::path a = dir / (sub + "_a.csv");
    const fs::path b = dir / (sub + "_b.csv");
    const std::string base = cli + " " + sub + " --config " + config.string() +
                             " --zeta 0.8 --out ";
    if (run_cli(base + a.string()) != 0 || run_cli(base + b.string()) != 0)
      return {false, sub + " exited nonzero"};
    if (slurp(a) != slurp(b))
      return {false, sub + " output is not byte-identical across runs"};
    if (slurp(a).empty()) return {false, sub + " produced no output"};
  }
  return {true, "validate exit 0; all subcommands byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  if (argc > 1) cli = argv[1];
  else if (const char* env = std::getenv("QID_CLI")) cli = env;

  struct Criterion {
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"oracle equivalence |C_exact - 8p(1-p)| < 1e-10",
       criterion_oracle_equivalence},
      {"spectrum matches the 1D band to 1e-10", criterion_spectrum},
      {"rectification law R(D) = e^(-4D/5) to 1e-6", criterion_rectification},
      {"OTOC onset and peak phenomenology (ratios, ordering, bounds)",
       criterion_phenomenology},
      {"suppression scaling of peak C_R as zeta^4 to 1e-9",
       criterion_suppression_scaling},
      {"nonreciprocity witness on the N=32 ring", criterion_nonreciprocity},
      {"magnon blockade g2(0) = 0 exactly", criterion_blockade},
      {"group-velocity and frequency-matching tolerances",
       criterion_derivatives},
      {"reproducibility: validate exit 0, byte-identical reruns",
       [&] { return criterion_reproducibility(cli); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %zu: %s — %s (%.2f s)\n",
                outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                outcome.detail.c_str(), secs);
    if (!outcome.pass) ++failures;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
