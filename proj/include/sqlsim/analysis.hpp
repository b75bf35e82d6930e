#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sqlsim/model.hpp"
#include "sqlsim/sde_engine.hpp"

namespace sqlsim {

/// 1 - sin(x)/x, series-expanded near zero where the direct form cancels.
inline double one_minus_sinc(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 1e-2) {
    return x2 / 6.0 - x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0;
  }
  return 1.0 - std::sin(x) / x;
}

/// Neumaier-compensated accumulator for ensemble moments.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

/// Backaction-diffusion rms: x_rms(t) = (hbar / (m sqrt(6 D))) t^(3/2).
double xrms_analytic(double t, const PhysicalParams& params);

/// Fundamental record noise after low-pass filtering: sqrt(D B / 2).
double noise_floor(double D, double B);

/// Time where x_rms crosses the noise floor: t* = (sqrt(3B) D m / hbar)^(2/3).
double crossing_time(const PhysicalParams& params);

/// Single-measurement figure of merit: (S/t)_max = 3^(-1/4) sqrt(hbar/m).
double sensitivity_bound(double mass, double hbar);

struct IdProduct {
  double lhs = 0.0;  // noise_floor(D, 1/t) * x_rms(t)
  double rhs = 0.0;  // hbar t / (2 sqrt(3) m)
};

/// Inference-disturbance product evaluated with B = 1/t; for this scheme the
/// two sides agree to roundoff.
IdProduct inference_disturbance_product(double D, double t, const PhysicalParams& params);

struct SignalNoise {
  double sigma = 0.0;  // m s
  double noise = 0.0;  // m s
};

/// Signal Sigma = (alpha D/hbar)[t - sqrt(mD/hbar) sin(omega0 t)] and rms
/// noise N = sqrt(D t / 2) of the integrated innovation.
SignalNoise signal_noise(double alpha, double D, double t, const PhysicalParams& params);

/// Smallest detectable force at this coupling:
/// alpha_min = hbar sqrt(t/2D) [t - sqrt(mD/hbar) sin(omega0 t)]^(-1).
/// Throws NumericalError(DegenerateDenominator) when the bracket underflows.
double alpha_min_at_D(double D, double t, const PhysicalParams& params);

/// Dimensionless objective of the coupling optimization, g(eta) =
/// eta - eta^2 sin(1/eta); alpha_min = sqrt(hbar m / 2 t^3) / g at D = eta^2 hbar t^2 / m.
double eta_objective(double eta);

struct EtaOptimum {
  double eta_star = 0.0;
  double g_max = 0.0;
};

/// Maximizes g over eta in [0.02, 5]: coarse grid at step 1e-3, then
/// golden-section refinement to |d eta| < 1e-8. The asymptotic tail
/// g ~ 1/(6 eta) guarantees the window brackets the global maximum.
EtaOptimum optimize_eta();

/// Weak-force SQL, sqrt(hbar m / 2 t^3) / g_max (g_max frozen from the
/// optimizer; numerically 1/g_max recovers pi).
double alpha_min_sql(double mass, double t, double hbar);

/// E|Normal(mu, sigma^2)|; the detection statistic at Sigma = N concentrates
/// on this folded mean rather than on 1.
double folded_normal_mean(double mu, double sigma);

template <typename F>
struct GoldenResult {
  double x = 0.0;
  double f = 0.0;
};

/// Golden-section maximization on [lo, hi]; stops when the bracket is
/// narrower than tol_x.
template <typename F>
inline GoldenResult<F> golden_section_max(F&& f, double lo, double hi, double tol_x) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol_x) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? GoldenResult<F>{x1, f1} : GoldenResult<F>{x2, f2};
}

/// Derived quantities of one parameter set, evaluated at observation time t.
struct SqlReport {
  double t = 0.0;
  double omega0 = 0.0;
  double noise_floor = 0.0;
  double t_star = 0.0;
  double xrms_at_tstar = 0.0;
  double sensitivity_bound = 0.0;
  double id_lhs = 0.0;
  double id_rhs = 0.0;
  double sigma_at_t = 0.0;      // signal for params.force_alpha
  double noise_at_t = 0.0;
  double alpha_min_at_d = 0.0;
  double d_optimal = 0.0;       // eta*^2 hbar t^2 / m
  double eta_star = 0.0;
  double g_max = 0.0;
  double alpha_min_sql = 0.0;
  double folded_snr1_mean = 0.0;  // E|N(1,1)|, the Sigma = N calibration target
};

SqlReport build_sql_report(const PhysicalParams& params, double t);

struct EnsembleStats {
  std::vector<double> t;
  std::vector<double> xrms;
  std::vector<double> var_p;
  std::vector<double> xrms_ci_lo;  // bootstrap 95% band on xrms
  std::vector<double> xrms_ci_hi;
};

struct EnsembleOptions {
  std::uint64_t bootstrap_seed = 0x5EEDB007ull;
  int bootstrap_rounds = 200;
};

/// Compensated-summation ensemble moments on a time grid, with bootstrap 95%
/// confidence bands on x_rms. Throws ConfigError(TooFewTrajectories) for
/// fewer than two trajectories.
EnsembleStats ensemble_stats(std::span<const Trajectory> trajectories,
                             std::span<const double> t_grid,
                             EnsembleOptions options = {});

}  // namespace sqlsim
