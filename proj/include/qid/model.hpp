#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qid {

inline constexpr double pi = std::numbers::pi;

/// Dispersion branch: sign applied to the DMI term, i.e. the propagation
/// direction of the magnon relative to the broken-inversion axis.
enum class Branch { plus, minus };

inline constexpr double branch_sign(Branch b) {
  return b == Branch::plus ? 1.0 : -1.0;
}

/// Physical couplings, lattice geometry and field parameters of the diode
/// model. Energies are measured in units of J1, lengths in units of choice
/// (defaults follow the dimensionless convention a = 1e-3, a0 = 1).
struct ModelParams {
  double j1 = 1.0;          ///< nearest-neighbor exchange, sets the energy scale
  double j2 = 0.5;          ///< next-nearest-neighbor exchange
  double d = 1.0;           ///< DMI strength; sign flips with the electric field
  double a = 1e-3;          ///< unit-cell lattice constant
  double a0 = 1.0;          ///< magnonic-crystal period
  int n = 1000;             ///< number of spins / excited Bragg modes
  double g_me = 1.0;        ///< magnetoelectric coupling (used by dmi_from_field)
  double zeta_decay = 5.0;  ///< decay scale of the suppression rate model

  void validate() const {
    if (!(j1 > 0.0)) throw std::invalid_argument("model: j1 must be > 0");
    if (!(j2 >= 0.0)) throw std::invalid_argument("model: j2 must be >= 0");
    if (!(a > 0.0)) throw std::invalid_argument("model: a must be > 0");
    if (!(a0 > 0.0)) throw std::invalid_argument("model: a0 must be > 0");
    if (n < 2) throw std::invalid_argument("model: n must be >= 2");
    if (!(zeta_decay > 0.0))
      throw std::invalid_argument("model: zeta_decay must be > 0");
    if (!std::isfinite(d) || !std::isfinite(g_me))
      throw std::invalid_argument("model: d and g_me must be finite");
  }
};

/// DMI constant induced by an electric field applied along y: D = E_y * g_ME.
/// Antisymmetric under field reversal.
inline double dmi_from_field(double e_y, double g_me) { return e_y * g_me; }

/// Two-dimensional magnon dispersion of the square lattice,
///   w(+-D, k) = 2 J1 (1 - g1) + 2 J2 (1 - g2) +- D sin(kx a),
/// with g1 = [cos(kx a) + cos(ky a)]/2 and
/// g2 = [cos((kx+ky) a) + cos((kx-ky) a)]/2.
inline double dispersion_2d(const ModelParams& p, double kx, double ky,
                            Branch branch) {
  const double g1 = 0.5 * (std::cos(kx * p.a) + std::cos(ky * p.a));
  const double g2 =
      0.5 * (std::cos((kx + ky) * p.a) + std::cos((kx - ky) * p.a));
  return 2.0 * p.j1 * (1.0 - g1) + 2.0 * p.j2 * (1.0 - g2) +
         branch_sign(branch) * p.d * std::sin(kx * p.a);
}

/// One-dimensional propagating-mode dispersion along x,
///   w(+-D, k) = 2 J1 (1 - cos(ka)/2) + 2 J2 (1 - cos(ka)) +- D sin(ka).
/// Kept strictly separate from dispersion_2d: the two differ by a constant
/// J1 at ky = 0 and are never mixed.
inline double dispersion_1d(const ModelParams& p, double kx, Branch branch) {
  const double ka = kx * p.a;
  return 2.0 * p.j1 * (1.0 - 0.5 * std::cos(ka)) +
         2.0 * p.j2 * (1.0 - std::cos(ka)) +
         branch_sign(branch) * p.d * std::sin(ka);
}

/// Analytic group velocity of dispersion_1d (hbar = 1):
///   v(+-D, k) = a [ (J1 + 2 J2) sin(ka) +- D cos(ka) ].
inline double group_velocity_1d(const ModelParams& p, double kx,
                                Branch branch) {
  const double ka = kx * p.a;
  return p.a * ((p.j1 + 2.0 * p.j2) * std::sin(ka) +
                branch_sign(branch) * p.d * std::cos(ka));
}

/// Bragg resonance wave vector k = m0 pi / a0 of the magnonic crystal.
inline double bragg_wavevector(int m0, double a0) {
  if (m0 < 1)
    throw std::invalid_argument("bragg_wavevector: m0 must be a positive integer");
  if (!(a0 > 0.0))
    throw std::invalid_argument("bragg_wavevector: a0 must be > 0");
  return static_cast<double>(m0) * pi / a0;
}

/// Wave vector of the left-propagating partner mode carrying the same
/// frequency as the right mover at k_plus:
///   k_minus = k_plus + (2/a) atan(D / (J1 + 2 J2)),
/// principal arctangent branch.
inline double left_wavevector(const ModelParams& p, double k_plus) {
  return k_plus + (2.0 / p.a) * std::atan(p.d / (p.j1 + 2.0 * p.j2));
}

/// Phenomenological gate-magnon suppression rate zeta(D) = exp(-D/decay).
/// An explicit override in (0, 1] takes precedence over the model.
inline double suppression_rate(const ModelParams& p,
                               std::optional<double> zeta_override = {}) {
  if (zeta_override) {
    if (!(*zeta_override > 0.0 && *zeta_override <= 1.0))
      throw std::invalid_argument(
          "suppression_rate: zeta override must lie in (0, 1]");
    return *zeta_override;
  }
  return std::exp(-p.d / p.zeta_decay);
}

/// Time before the fastest excitation wraps the periodic system,
/// t_max = N a / |v_g|. Degenerate (band-edge) velocities are an error:
/// the caller must pick a different reference k.
inline double max_time(const ModelParams& p, double kx, Branch branch) {
  const double v = group_velocity_1d(p, kx, branch);
  if (std::abs(v) < 1e-12)
    throw std::domain_error(
        "max_time: group velocity is degenerate at this k");
  return static_cast<double>(p.n) * p.a / std::abs(v);
}

/// One Bragg-excited mode: paired right/left wave vectors sharing the
/// frequency omega.
struct Mode {
  int m0;          ///< mode index, 1-based
  double k_plus;   ///< right wave vector, exactly m0 pi / a0
  double k_minus;  ///< left wave vector with matching frequency
  double omega;    ///< shared frequency w(+D, k_plus) = w(-D, k_minus)
};

/// The excited mode set m0 = 1..n, ordered by m0.
struct ModeSet {
  ModelParams params;
  std::vector<Mode> modes;
};

inline ModeSet build_mode_set(const ModelParams& p) {
  p.validate();
  ModeSet set{p, {}};
  set.modes.reserve(static_cast<std::size_t>(p.n));
  for (int m0 = 1; m0 <= p.n; ++m0) {
    const double kp = bragg_wavevector(m0, p.a0);
    set.modes.push_back(
        {m0, kp, left_wavevector(p, kp), dispersion_1d(p, kp, Branch::plus)});
  }
  return set;
}

}  // namespace qid
