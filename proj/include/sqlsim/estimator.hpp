#pragma once

#include <span>
#include <vector>

#include "sqlsim/discrete_chain.hpp"
#include "sqlsim/model.hpp"
#include "sqlsim/sde_engine.hpp"

namespace sqlsim {

/// Recursive estimator state. e = x - x_hat is only meaningful when the truth
/// is known; the run_filter_* helpers fill it, the raw steps leave it alone.
struct FilterState {
  double x_hat = 0.0;         // m
  double p_hat = 0.0;         // kg m/s
  double e = 0.0;             // m
  double eta_integral = 0.0;  // m s, accumulated d_eta
  double time = 0.0;          // s
};

struct DiscreteFilterStep {
  FilterState state;
  double innovation = 0.0;  // eta_r = xi_r - x_hat'_r, m
};

struct ContinuousFilterStep {
  FilterState state;
  double d_eta = 0.0;  // d_xi - x_hat dt, m s
};

/// Same gains as the stationary chain, no force term in the update rules.
DiscreteFilterStep filter_step_discrete(const FilterState& f, double xi,
                                        const PhysicalParams& params, double C);

/// Euler update of dx_hat = (p_hat/m) dt, dp_hat = (hbar/D)(d_xi - x_hat dt).
ContinuousFilterStep filter_step_continuous(const FilterState& f, double d_xi,
                                            const PhysicalParams& params, double h);

/// Closed form for the estimation error under a constant force with matched
/// initialization: e(t) = (alpha D / hbar) (1 - cos(omega0 t)).
double error_oscillator_analytic(double t, const PhysicalParams& params);

/// Compensated sum of eta * dt; pass eta_r for discrete records or d_eta/dt
/// samples for continuous ones.
double integrate_innovation(std::span<const double> etas, double dt);

struct FilterTrace {
  std::vector<FilterState> states;   // one per grid point, matched to the input
  std::vector<double> innovations;   // eta_r (discrete) or d_eta (continuous)
};

/// Runs the continuous filter over a trajectory's record increments,
/// filling e from the trajectory truth.
FilterTrace run_filter_continuous(const PhysicalParams& params, const Trajectory& traj,
                                  double x_hat0 = 0.0, double p_hat0 = 0.0);

/// Runs the discrete filter over a measurement record; e is filled when the
/// truth chain is supplied.
FilterTrace run_filter_discrete(const PhysicalParams& params, double C,
                                const MeasurementRecord& record,
                                const ChainTrajectory* truth = nullptr,
                                double x_hat0 = 0.0, double p_hat0 = 0.0);

struct DetectionResult {
  double statistic = 0.0;  // |int d_eta| / sqrt(D t / 2)
  bool detected = false;   // statistic >= 1
};

/// Decision rule Sigma/N = 1 applied to a record of d_xi increments spanning
/// at least [0, t]. Throws ConfigError(RecordTooShort) otherwise.
DetectionResult detect_force(std::span<const double> d_xi, double h,
                             const PhysicalParams& params, double t);

}  // namespace sqlsim
