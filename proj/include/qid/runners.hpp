#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qid/config.hpp"
#include "qid/model.hpp"
#include "qid/oracle.hpp"
#include "qid/otoc.hpp"
#include "qid/table.hpp"

namespace qid {

namespace detail {

inline void add_config_metadata(OutputTable& t, const RunConfig& cfg) {
  for (const KeyInfo& k : config_keys())
    t.add_metadata(k.name, render_key(cfg, k.name) + " (" +
                               provenance_name(cfg.source(k.name)) + ")");
}

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

inline double lattice_band_max(const ModelParams& p) {
  double w = 0.0;
  for (int m = 0; m < p.n; ++m) {
    const double k =
        2.0 * pi * static_cast<double>(m) / (static_cast<double>(p.n) * p.a);
    w = std::max(w, std::abs(dispersion_1d(p, k, Branch::plus)));
  }
  return w;
}

inline TimeGrid resolve_grid(const RunConfig& cfg, double omega_max,
                             double default_t_max = 30.0) {
  const double dt = cfg.dt.value_or(2.0 * pi / (40.0 * omega_max));
  const double t_max = cfg.t_max.value_or(default_t_max);
  const int steps = static_cast<int>(std::floor(t_max / dt + 1e-9)) + 1;
  return TimeGrid(dt, std::max(steps, 2));
}

}  // namespace detail

/// Nonreciprocal dispersion and group velocities sampled uniformly over
/// ka in [-pi, pi].
inline OutputTable run_dispersion(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  OutputTable t;
  t.title = "dispersion";
  detail::add_config_metadata(t, cfg);
  t.columns = {"k", "omega_plus", "omega_minus", "vg_plus", "vg_minus"};
  for (double ka : detail::linspace(-pi, pi, cfg.k_steps)) {
    const double k = ka / p.a;
    t.add_row({k, dispersion_1d(p, k, Branch::plus),
               dispersion_1d(p, k, Branch::minus),
               group_velocity_1d(p, k, Branch::plus),
               group_velocity_1d(p, k, Branch::minus)});
  }
  return t;
}

/// Left/right OTOC time series over the Bragg mode set.
inline OutputTable run_otoc(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  const ModeSet set = build_mode_set(p);
  const double w_max = detail::max_mode_frequency(set);
  const TimeGrid grid = detail::resolve_grid(cfg, w_max);
  const double r = static_cast<double>(cfg.r_sites) * p.a;
  const OtocSeries series = otoc_series(p, r, grid, cfg.zeta);

  OutputTable t;
  t.title = "otoc";
  detail::add_config_metadata(t, cfg);
  t.add_metadata("zeta_effective", format_value(series.zeta));
  t.add_metadata("modes", std::to_string(p.n));
  t.add_metadata("r", format_value(r));
  t.add_metadata("dt_resolved", format_value(grid.dt));
  // flagged, not fatal: the grid no longer oversamples the fastest mode
  const bool underresolved = grid.dt > 2.0 * pi / (20.0 * w_max);
  t.add_metadata("underresolved", underresolved ? "true" : "false");

  t.columns = {"t", "c_left", "c_right"};
  for (std::size_t i = 0; i < series.times.size(); ++i)
    t.add_row({series.times[i], series.c_left[i], series.c_right[i]});
  return t;
}

/// Rectification coefficient against DMI strength, one row per D, all rows
/// sharing identical quadrature settings.
inline OutputTable run_rectify(const RunConfig& cfg) {
  const std::vector<double> d_values =
      detail::linspace(cfg.d_min, cfg.d_max, cfg.d_steps);

  // Quadrature defaults come from the largest sweep value: it has the
  // stiffest mode, so its dt satisfies the resolution bound for every row.
  ModelParams quad_params = cfg.model;
  quad_params.d = d_values.back();
  const QuadratureSpec defaults = default_quadrature(quad_params);
  const QuadratureSpec quad{cfg.t_max.value_or(defaults.t_truncation),
                            cfg.dt.value_or(defaults.dt)};

  const double r = static_cast<double>(cfg.r_sites) * cfg.model.a;
  const std::vector<SweepRow> rows =
      sweep_rectification(cfg.model, d_values, r, quad, cfg.zeta);

  OutputTable t;
  t.title = "rectify";
  detail::add_config_metadata(t, cfg);
  t.add_metadata("r", format_value(r));
  t.add_metadata("t_truncation", format_value(quad.t_truncation));
  t.add_metadata("quad_dt", format_value(quad.dt));
  std::string conv, tails;
  for (const SweepRow& row : rows) {
    if (!conv.empty()) {
      conv += ',';
      tails += ',';
    }
    conv += row.converged ? '1' : '0';
    tails += format_value(row.tail_estimate);
  }
  t.add_metadata("row_converged", conv);
  t.add_metadata("row_tail_estimate", tails);

  t.columns = {"D", "zeta", "R", "R_analytic"};
  for (const SweepRow& row : rows)
    t.add_row({row.d, row.zeta, row.r_coeff, row.r_analytic});
  return t;
}

/// Exact-oracle OTOC against the closed-form lattice propagator series.
/// A tolerance breach is the caller's hard failure (exit 1): this run is the
/// correctness gate.
struct LatticeOtocRun {
  OutputTable table;
  double max_abs_error = 0.0;
  bool pass = false;
};

inline LatticeOtocRun run_lattice_otoc(const RunConfig& cfg) {
  ModelParams p = cfg.model;
  p.n = cfg.n_sites;
  const OracleChain chain(cfg.model, cfg.n_sites);
  const TimeGrid grid = detail::resolve_grid(cfg, detail::lattice_band_max(p));
  const LatticeOtocSeries lattice =
      lattice_propagator_otoc(p, cfg.displacement, grid);
  const int probe =
      ((cfg.displacement % cfg.n_sites) + cfg.n_sites) % cfg.n_sites;

  LatticeOtocRun run;
  run.table.title = "lattice-otoc";
  detail::add_config_metadata(run.table, cfg);
  run.table.columns = {"t", "c_exact", "c_formula", "abs_err"};
  for (std::size_t i = 0; i < lattice.times.size(); ++i) {
    const double exact = otoc_exact(chain, 0, probe, lattice.times[i]);
    const double err = std::abs(exact - lattice.c[i]);
    run.max_abs_error = std::max(run.max_abs_error, err);
    run.table.add_row({lattice.times[i], exact, lattice.c[i], err});
  }
  run.pass = run.max_abs_error < 1e-10;
  run.table.add_metadata("max_abs_err", format_value(run.max_abs_error));
  run.table.add_metadata("pass", run.pass ? "true" : "false");
  return run;
}

/// One validation check: `observed` compared against `threshold` with the
/// direction baked into `pass` at construction.
struct ValidationCheck {
  std::string name;
  bool pass = false;
  double observed = std::numeric_limits<double>::quiet_NaN();
  double threshold = 0.0;
  std::string note;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.pass) out.push_back(c.name);
    return out;
  }

  std::string to_text() const {
    std::string out;
    for (const auto& c : checks) {
      out += c.pass ? "[PASS] " : "[FAIL] ";
      out += c.name + "  observed=" + format_value(c.observed) +
             " threshold=" + format_value(c.threshold);
      if (!c.note.empty()) out += "  (" + c.note + ")";
      out += '\n';
    }
    out += pass() ? "validate: all checks passed\n"
                  : "validate: " + std::to_string(failures().size()) +
                        " check(s) failed\n";
    return out;
  }

  std::string to_json() const {
    nlohmann::ordered_json doc;
    doc["command"] = "validate";
    doc["version"] = version;
    doc["pass"] = pass();
    doc["failures"] = failures();
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      nlohmann::ordered_json jc;
      jc["name"] = c.name;
      jc["pass"] = c.pass;
      jc["observed"] = c.observed;
      jc["threshold"] = c.threshold;
      if (!c.note.empty()) jc["note"] = c.note;
      arr.push_back(std::move(jc));
    }
    doc["checks"] = std::move(arr);
    return doc.dump(2) + "\n";
  }
};

/// Runs every invariant suite against the resolved configuration. Exceptions
/// inside a check are reported as failures rather than aborting the run.
inline ValidationReport run_validate(const RunConfig& cfg) {
  const ModelParams base = cfg.model;
  ValidationReport report;

  const auto run_check = [&](const std::string& name, double threshold,
                             const std::function<std::pair<bool, double>()>& fn) {
    ValidationCheck check;
    check.name = name;
    check.threshold = threshold;
    try {
      const auto [ok, observed] = fn();
      check.pass = ok;
      check.observed = observed;
    } catch (const std::exception& e) {
      check.pass = false;
      check.note = e.what();
    }
    report.checks.push_back(std::move(check));
  };

  std::mt19937 rng(0x51D5EED);
  std::uniform_real_distribution<double> uk(-pi, pi);

  run_check("dispersion_mirror_2d", 1e-14, [&] {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double kx = uk(rng) / base.a, ky = uk(rng) / base.a;
      worst = std::max(worst,
                       std::abs(dispersion_2d(base, kx, ky, Branch::plus) -
                                dispersion_2d(base, -kx, ky, Branch::minus)));
    }
    return std::pair{worst <= 1e-14, worst};
  });

  run_check("branch_gap_1d", 1e-14, [&] {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double k = uk(rng) / base.a;
      const double gap = dispersion_1d(base, k, Branch::plus) -
                         dispersion_1d(base, k, Branch::minus);
      worst = std::max(worst, std::abs(gap - 2.0 * base.d * std::sin(k * base.a)));
    }
    return std::pair{worst <= 1e-14, worst};
  });

  run_check("y_axis_reciprocity", 0.0, [&] {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double ky = uk(rng) / base.a;
      worst = std::max(worst,
                       std::abs(dispersion_2d(base, 0.0, ky, Branch::plus) -
                                dispersion_2d(base, 0.0, ky, Branch::minus)));
    }
    return std::pair{worst <= 0.0, worst};
  });

  run_check("mode_frequency_match", 1e-12, [&] {
    const ModeSet set = build_mode_set(base);
    double worst = 0.0;
    for (const Mode& m : set.modes)
      worst = std::max(worst,
                       std::abs(m.omega -
                                dispersion_1d(base, m.k_minus, Branch::minus)));
    return std::pair{worst <= 1e-12, worst};
  });

  run_check("group_velocity_fd", 1e-8, [&] {
    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double k = uk(rng) / base.a;
      for (Branch b : {Branch::plus, Branch::minus}) {
        const double fd = (dispersion_1d(base, k + h, b) -
                           dispersion_1d(base, k - h, b)) /
                          (2.0 * h);
        worst = std::max(worst, std::abs(fd - group_velocity_1d(base, k, b)));
      }
    }
    return std::pair{worst <= 1e-8, worst};
  });

  run_check("zeta_monotone", 0.0, [&] {
    ModelParams p = base;
    p.d = 0.0;
    if (suppression_rate(p) != 1.0) return std::pair{false, 1.0};
    double prev = 1.0, worst = -1.0;
    for (double dv = 0.25; dv <= 5.0; dv += 0.25) {
      p.d = dv;
      const double z = suppression_rate(p);
      worst = std::max(worst, z - prev);
      prev = z;
    }
    return std::pair{worst < 0.0, worst};
  });

  // shared series for the bound and suppression checks
  run_check("otoc_bounds", 0.0, [&] {
    const ModeSet set = build_mode_set(base);
    const TimeGrid grid(2.0 * pi / (40.0 * detail::max_mode_frequency(set)),
                        1001);
    const OtocSeries s = otoc_series(base, cfg.r_sites * base.a, grid, cfg.zeta);
    double violation = 0.0;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      for (double v : {s.c_left[i], s.c_right[i]}) {
        violation = std::max(violation, v - 2.0);
        violation = std::max(violation, -v);
      }
    }
    return std::pair{violation <= 0.0, violation};
  });

  run_check("suppression_identity", 1e-12, [&] {
    const ModeSet set = build_mode_set(base);
    const TimeGrid grid(2.0 * pi / (40.0 * detail::max_mode_frequency(set)),
                        1001);
    const OtocSeries s = otoc_series(base, cfg.r_sites * base.a, grid, cfg.zeta);
    const double z4 = std::pow(s.zeta, 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.times.size(); ++i)
      worst = std::max(worst, std::abs(s.c_right[i] - z4 * s.c_left[i]));
    return std::pair{worst <= 1e-12, worst};
  });

  run_check("rectification_identity", 1e-6, [&] {
    const QuadratureSpec defaults = default_quadrature(base);
    const QuadratureSpec quad{std::min(defaults.t_truncation, 150.0),
                              defaults.dt};
    const RectificationResult res = rectification_coefficient(
        base, cfg.r_sites * base.a, quad, cfg.zeta);
    const double z4 = std::pow(suppression_rate(base, cfg.zeta), 4);
    const double rel = std::abs(res.r_coeff - z4) / z4;
    return std::pair{res.converged && rel <= 1e-6, rel};
  });

  run_check("oracle_spectrum_matches_dispersion", 1e-10, [&] {
    const int n = 64;
    const OracleChain chain(base, n);
    std::vector<double> band(n);
    ModelParams p = base;
    for (int m = 0; m < n; ++m)
      band[static_cast<std::size_t>(m)] = dispersion_1d(
          p, 2.0 * pi * m / (n * p.a), Branch::plus);
    std::sort(band.begin(), band.end());
    double worst = 0.0;
    for (int m = 0; m < n; ++m)
      worst = std::max(worst,
                       std::abs(chain.decomposition().eigenvalues(m) -
                                band[static_cast<std::size_t>(m)]));
    return std::pair{worst <= 1e-10, worst};
  });

  run_check("oracle_closed_form_identity", 1e-12, [&] {
    const OracleChain chain(base, 16);
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double t = 0.3 * i;
      const double p = chain.transition_probability(0, 3, t);
      worst = std::max(worst, std::abs(otoc_exact(chain, 0, 3, t) -
                                       8.0 * p * (1.0 - p)));
    }
    return std::pair{worst <= 1e-12, worst};
  });

  run_check("oracle_cross_validate", 1e-10, [&] {
    const TimeGrid grid(0.3, 101);
    double worst = 0.0;
    for (int n : {8, 16, 32}) {
      const CrossValidationReport rep = cross_validate(
          base, n, {{0, 3}, {0, n - 3}}, grid);
      worst = std::max(worst, rep.max_abs_error);
    }
    // and the configured chain/pairs
    worst = std::max(
        worst,
        cross_validate(base, cfg.n_sites, cfg.pairs, grid).max_abs_error);
    return std::pair{worst <= 1e-10, worst};
  });

  run_check("oracle_unitarity", 1e-12, [&] {
    const OracleChain chain(base, 16);
    std::uniform_real_distribution<double> ut(0.0, 100.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng);
      for (int site : {0, 7}) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(16);
        psi(site) = 1.0;
        worst = std::max(worst,
                         std::abs(chain.evolve(psi, t).squaredNorm() - 1.0));
      }
    }
    return std::pair{worst <= 1e-12, worst};
  });

  run_check("eta_operator_algebra", 0.0, [&] {
    const int n = 8;
    double worst = 0.0;
    for (int j : {0, 3, 7}) {
      Eigen::MatrixXcd eta = -Eigen::MatrixXcd::Identity(n, n);
      eta(j, j) += 2.0;
      worst = std::max(worst,
                       (eta * eta - Eigen::MatrixXcd::Identity(n, n))
                           .cwiseAbs()
                           .maxCoeff());
      worst = std::max(worst, (eta - eta.adjoint()).cwiseAbs().maxCoeff());
    }
    return std::pair{worst <= 0.0, worst};
  });

  run_check("asymmetry_parity_restoration", 1e-12, [&] {
    ModelParams p = base;
    p.d = 0.0;
    const OracleChain chain(p, 32);
    const AsymmetryReport rep = asymmetry_probe(chain, 0, 5, TimeGrid(0.5, 61));
    return std::pair{rep.max_gap <= 1e-12, rep.max_gap};
  });

  // Even rings are gauge-degenerate for the folded single-harmonic chain, so
  // the genuine nonreciprocity witness runs on an odd ring.
  run_check("asymmetry_nonreciprocity_odd_ring", 1e-3, [&] {
    ModelParams p = base;
    if (p.d == 0.0) p.d = 1.0;
    const OracleChain chain(p, 33);
    const AsymmetryReport rep = asymmetry_probe(chain, 0, 5, TimeGrid(0.5, 61));
    return std::pair{rep.max_gap > 1e-3, rep.max_gap};
  });

  run_check("blockade_g2_zero", 0.0, [&] {
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXcd state(16);
      for (int s = 0; s < 16; ++s)
        state(s) = complexd{gauss(rng), gauss(rng)};
      state.normalize();
      const BlockadeResult res = g2_zero(state, 3);
      worst = std::max(worst, std::abs(res.g2) + res.numerator);
    }
    return std::pair{worst <= 0.0, worst};
  });

  return report;
}

}  // namespace qid
