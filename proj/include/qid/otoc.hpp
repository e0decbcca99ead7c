#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qid/model.hpp"

namespace qid {

using complexd = std::complex<double>;

/// Which OTOC the phase sum belongs to: left-moving (k_minus phases) or
/// right-moving (Bragg k_plus phases).
enum class Side { left, right };

/// Uniform time grid starting at t = 0.
struct TimeGrid {
  static constexpr double t_start = 0.0;
  double dt;
  int steps;

  TimeGrid(double dt_, int steps_) : dt(dt_), steps(steps_) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (steps < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
  }

  double time(int i) const { return dt * static_cast<double>(i); }

  std::vector<double> times() const {
    std::vector<double> out(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = time(i);
    return out;
  }
};

/// Left/right OTOC time series over the Bragg mode set.
struct OtocSeries {
  std::vector<double> times;
  std::vector<double> c_left;
  std::vector<double> c_right;
  double r = 0.0;     ///< spin separation, r = |n - m| a
  double zeta = 1.0;  ///< suppression rate applied to the right series
};

/// Single-series OTOC of the exact lattice propagator.
struct LatticeOtocSeries {
  std::vector<double> times;
  std::vector<double> c;
  int displacement = 0;  ///< signed site displacement m - n
};

/// Phase sum over the excited mode set,
///   Omega_1 = sum_m0 exp(-i k r) exp(i w_m0 t),
/// with k = k_plus (right) or k_minus (left). Omega_2 is its conjugate and
/// is never evaluated by a second summation.
inline complexd omega_sum(const ModeSet& set, double r, double t, Side side) {
  complexd acc{0.0, 0.0};
  for (const Mode& m : set.modes) {
    const double k = side == Side::right ? m.k_plus : m.k_minus;
    acc += std::polar(1.0, m.omega * t - k * r);
  }
  return acc;
}

namespace detail {

// C = 8 p (1 - p); p is clamped to [0, 1] since |Omega| <= N holds exactly
// and only rounding can push the ratio past one.
inline double otoc_from_probability(double p) {
  p = std::clamp(p, 0.0, 1.0);
  return 8.0 * p * (1.0 - p);
}

}  // namespace detail

/// Left and right OTOCs over the Bragg mode set:
///   C_L = 8 p_L (1 - p_L),  C_R = zeta^4 * 8 p_R (1 - p_R),
/// with p = |Omega_1 / N|^2 computed as a squared magnitude so the series is
/// real and non-negative by construction. The suppression rate comes from
/// suppression_rate(params) unless overridden; it must lie in (0, 1], so
/// runs with d < 0 require an explicit override.
inline OtocSeries otoc_series(const ModelParams& params, double r,
                              const TimeGrid& grid,
                              std::optional<double> zeta_override = {}) {
  params.validate();
  if (r < 0.0)
    throw std::invalid_argument(
        "otoc_series: r must be >= 0; use the lattice propagator for signed "
        "displacements");
  const double sites = r / params.a;
  if (std::abs(sites - std::round(sites)) > 1e-9 * std::max(1.0, sites))
    throw std::invalid_argument(
        "otoc_series: r must be an integer multiple of the lattice constant a");
  const double zeta = suppression_rate(params, zeta_override);
  if (!(zeta > 0.0 && zeta <= 1.0))
    throw std::invalid_argument(
        "otoc_series: suppression rate falls outside (0, 1]; pass an explicit "
        "zeta override when d < 0");

  const ModeSet set = build_mode_set(params);
  const std::size_t nm = set.modes.size();
  std::vector<double> omega(nm);
  std::vector<complexd> phase_r(nm), phase_l(nm);
  for (std::size_t i = 0; i < nm; ++i) {
    const Mode& m = set.modes[i];
    omega[i] = m.omega;
    phase_r[i] = std::polar(1.0, -m.k_plus * r);
    phase_l[i] = std::polar(1.0, -m.k_minus * r);
  }

  const double inv_n = 1.0 / static_cast<double>(params.n);
  const double z4 = zeta * zeta * zeta * zeta;

  OtocSeries out;
  out.r = r;
  out.zeta = zeta;
  out.times = grid.times();
  out.c_left.resize(out.times.size());
  out.c_right.resize(out.times.size());
  for (std::size_t it = 0; it < out.times.size(); ++it) {
    const double t = out.times[it];
    complexd acc_r{0.0, 0.0}, acc_l{0.0, 0.0};
    for (std::size_t i = 0; i < nm; ++i) {
      const complexd e = std::polar(1.0, omega[i] * t);
      acc_r += e * phase_r[i];
      acc_l += e * phase_l[i];
    }
    const double p_r = std::norm(acc_r * inv_n);
    const double p_l = std::norm(acc_l * inv_n);
    out.c_left[it] = detail::otoc_from_probability(p_l);
    out.c_right[it] = z4 * detail::otoc_from_probability(p_r);
  }
  return out;
}

/// OTOC of the exact periodic-lattice propagator over the physical Brillouin
/// zone k_m = 2 pi m / (N a):
///   p(t) = |(1/N) sum_m exp(i k_m d a) exp(-i w(+D, k_m) t)|^2,
///   C    = 8 p (1 - p).
/// Carries genuine sign-of-displacement information and no zeta factor.
inline LatticeOtocSeries lattice_propagator_otoc(const ModelParams& params,
                                                 int displacement,
                                                 const TimeGrid& grid) {
  params.validate();
  if (std::abs(displacement) >= params.n)
    throw std::invalid_argument(
        "lattice_propagator_otoc: |displacement| must be < n");

  const std::size_t n = static_cast<std::size_t>(params.n);
  std::vector<double> omega(n);
  std::vector<complexd> phase(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double k =
        2.0 * pi * static_cast<double>(m) / (static_cast<double>(n) * params.a);
    omega[m] = dispersion_1d(params, k, Branch::plus);
    phase[m] = std::polar(1.0, k * static_cast<double>(displacement) * params.a);
  }

  const double inv_n = 1.0 / static_cast<double>(params.n);
  LatticeOtocSeries out;
  out.displacement = displacement;
  out.times = grid.times();
  out.c.resize(out.times.size());
  for (std::size_t it = 0; it < out.times.size(); ++it) {
    const double t = out.times[it];
    complexd acc{0.0, 0.0};
    for (std::size_t m = 0; m < n; ++m)
      acc += phase[m] * std::polar(1.0, -omega[m] * t);
    out.c[it] = detail::otoc_from_probability(std::norm(acc * inv_n));
  }
  return out;
}

/// Trapezoid quadrature settings for the rectification integrals.
struct QuadratureSpec {
  double t_truncation;
  double dt;
};

/// Integrated rectification result R = int C_R dt / int C_L dt on
/// [0, t_truncation], with a convergence signal from one internal doubling
/// of the truncation time.
struct RectificationResult {
  double r_coeff;
  double integral_left;
  double integral_right;
  double t_truncation;  ///< actual truncation time (rounded up to the grid)
  double dt;
  double tail_estimate;  ///< relative change of R when t_truncation doubles
  bool converged;        ///< tail_estimate < 1e-3
};

namespace detail {

inline double max_mode_frequency(const ModeSet& set) {
  double w = 0.0;
  for (const Mode& m : set.modes) w = std::max(w, std::abs(m.omega));
  return w;
}

inline double max_mode_speed(const ModeSet& set) {
  double v = 0.0;
  for (const Mode& m : set.modes) {
    v = std::max(v, std::abs(group_velocity_1d(set.params, m.k_plus, Branch::plus)));
    v = std::max(v, std::abs(group_velocity_1d(set.params, m.k_minus, Branch::minus)));
  }
  return v;
}

inline double trapezoid(const std::vector<double>& y, double dt,
                        std::size_t count) {
  double sum = 0.5 * (y[0] + y[count - 1]);
  for (std::size_t i = 1; i + 1 < count; ++i) sum += y[i];
  return sum * dt;
}

}  // namespace detail

/// Default quadrature: truncate at the wrap time of the fastest excited mode
/// and oversample the fastest oscillation by a factor of 40.
inline QuadratureSpec default_quadrature(const ModelParams& params) {
  const ModeSet set = build_mode_set(params);
  const double w_max = detail::max_mode_frequency(set);
  const double v_max = detail::max_mode_speed(set);
  if (v_max < 1e-12 || w_max <= 0.0)
    throw std::domain_error(
        "default_quadrature: mode set carries no propagating excitation");
  return {static_cast<double>(params.n) * params.a / v_max,
          2.0 * pi / (40.0 * w_max)};
}

inline RectificationResult rectification_coefficient(
    const ModelParams& params, double r, const QuadratureSpec& quad,
    std::optional<double> zeta_override = {}) {
  if (!(quad.t_truncation > 0.0))
    throw std::invalid_argument(
        "rectification_coefficient: t_truncation must be > 0");
  const ModeSet set = build_mode_set(params);
  const double w_max = detail::max_mode_frequency(set);
  if (!(quad.dt > 0.0) || quad.dt > 2.0 * pi / (20.0 * w_max))
    throw std::invalid_argument(
        "rectification_coefficient: dt does not resolve the fastest mode "
        "(need dt <= 2 pi / (20 max omega))");

  // One series over [0, 2T] serves both the reported integrals on [0, T] and
  // the doubled-truncation convergence check.
  const std::size_t half =
      std::max<std::size_t>(2, static_cast<std::size_t>(
                                   std::ceil(quad.t_truncation / quad.dt)));
  const TimeGrid grid(quad.dt, static_cast<int>(2 * half + 1));
  const OtocSeries series = otoc_series(params, r, grid, zeta_override);

  const double il = detail::trapezoid(series.c_left, quad.dt, half + 1);
  const double ir = detail::trapezoid(series.c_right, quad.dt, half + 1);
  const double il2 = detail::trapezoid(series.c_left, quad.dt, 2 * half + 1);
  const double ir2 = detail::trapezoid(series.c_right, quad.dt, 2 * half + 1);
  if (!(il > 0.0))
    throw std::domain_error(
        "rectification_coefficient: left OTOC integral vanishes");

  const double r_t = ir / il;
  const double r_2t = ir2 / il2;
  const double tail =
      std::abs(r_2t - r_t) / std::max(std::abs(r_2t), 1e-300);

  RectificationResult res;
  res.r_coeff = r_t;
  res.integral_left = il;
  res.integral_right = ir;
  res.t_truncation = quad.dt * static_cast<double>(half);
  res.dt = quad.dt;
  res.tail_estimate = tail;
  res.converged = tail < 1e-3;
  return res;
}

/// One row of the rectification sweep.
struct SweepRow {
  double d;
  double zeta;
  double r_coeff;
  double r_analytic;  ///< zeta^4, the closed-form suppression of the ratio
  double tail_estimate;
  bool converged;
};

/// Rectification coefficient versus DMI strength, every row computed with
/// the same quadrature settings.
inline std::vector<SweepRow> sweep_rectification(
    const ModelParams& params, const std::vector<double>& d_values, double r,
    const QuadratureSpec& quad, std::optional<double> zeta_override = {}) {
  std::vector<SweepRow> rows;
  rows.reserve(d_values.size());
  for (double dv : d_values) {
    if (!std::isfinite(dv) || dv < 0.0)
      throw std::invalid_argument(
          "sweep_rectification: d values must be finite and >= 0");
    ModelParams row_params = params;
    row_params.d = dv;
    const RectificationResult res =
        rectification_coefficient(row_params, r, quad, zeta_override);
    const double zeta = suppression_rate(row_params, zeta_override);
    const double z4 = zeta * zeta * zeta * zeta;
    rows.push_back(
        {dv, zeta, res.r_coeff, z4, res.tail_estimate, res.converged});
  }
  return rows;
}

}  // namespace qid
