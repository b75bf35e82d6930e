#pragma once

#include <cmath>
#include <optional>

#include "sqlsim/errors.hpp"

namespace sqlsim {

// CODATA value; overridable so natural-unit runs can pin hbar = 1.
inline constexpr double kDefaultHbar = 1.054571817e-34;  // J s

// Relative tolerance for the discrete-mode consistency sigma * tau == D.
inline constexpr double kSigmaTauRtol = 1e-12;

/// Model constants, SI units throughout.
///
/// coupling_D is the measurement inaccuracy squared per unit bandwidth
/// (m^2 s = m^2 / Hz); it ties the discrete chain to the continuous limit
/// through D = sigma * tau. tau and sigma are present only in discrete mode.
/// bandwidth_B is a signal-processing choice, independent of the coupling.
struct PhysicalParams {
  double hbar = kDefaultHbar;   // J s
  double mass = 0.0;            // kg
  double coupling_D = 0.0;      // m^2 s
  double bandwidth_B = 0.0;     // Hz
  double force_alpha = 0.0;     // N, constant external force
  std::optional<double> tau;    // s, inter-measurement interval
  std::optional<double> sigma;  // m^2, meter wavefunction width parameter

  bool discrete_mode() const { return tau.has_value(); }
};

/// Gaussian pure-state summary: means plus the two width parameters
///   delta   = 2 <(dx)^2>
///   epsilon = <dx dp + dp dx> / hbar   (symmetrized covariance)
/// The pure-state closure fixes the momentum width:
///   Vpp = hbar^2 (1 + epsilon^2) / (2 delta),
/// so Vxx Vpp - Vxp^2 = hbar^2 / 4 is preserved by the update cycle.
/// contraction_C records the factor applied by the latest conditioning,
/// C = 1 + delta'/sigma >= 1; in stationary mode it is step-independent.
struct GaussianMoments {
  double x_mean = 0.0;        // m
  double p_mean = 0.0;        // kg m/s
  double delta = 0.0;         // m^2
  double epsilon = 0.0;       // dimensionless
  double contraction_C = 1.0; // dimensionless
};

/// Momentum variance implied by purity, <(dp)^2>.
inline double momentum_variance(const GaussianMoments& g, double hbar) {
  return hbar * hbar * (1.0 + g.epsilon * g.epsilon) / (2.0 * g.delta);
}

/// Error-oscillator angular frequency, omega0 = sqrt(hbar / (m D)).
inline double omega0(const PhysicalParams& p) {
  return std::sqrt(p.hbar / (p.mass * p.coupling_D));
}

/// Normalizes and checks params. In discrete mode fills sigma = D / tau when
/// only (D, tau) are given. Idempotent.
///
/// Throws ConfigError with code NonPositive(field), NonFinite(force_alpha),
/// MissingRequired(tau), or InconsistentDTS.
PhysicalParams validate_params(PhysicalParams raw);

}  // namespace sqlsim
