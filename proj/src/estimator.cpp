#include "sqlsim/estimator.hpp"

#include <cmath>
#include <cstddef>

namespace sqlsim {

DiscreteFilterStep filter_step_discrete(const FilterState& f, double xi,
                                        const PhysicalParams& params, double C) {
  const double tau = *params.tau;
  const ChainGains gains = chain_gains(params, C);
  const double x_hat_prime = premeasure_position(f.x_hat, f.p_hat, tau, params.mass);
  const double eta = xi - x_hat_prime;

  DiscreteFilterStep out;
  out.innovation = eta;
  out.state = f;
  out.state.x_hat = x_hat_prime + gains.position_gain * eta;
  out.state.p_hat = f.p_hat + gains.momentum_kick * eta;
  out.state.eta_integral = f.eta_integral + eta * tau;
  out.state.time = f.time + tau;
  return out;
}

ContinuousFilterStep filter_step_continuous(const FilterState& f, double d_xi,
                                            const PhysicalParams& params, double h) {
  const double d_eta = d_xi - f.x_hat * h;  // pre-step x_hat, Ito convention

  ContinuousFilterStep out;
  out.d_eta = d_eta;
  out.state = f;
  out.state.x_hat = f.x_hat + f.p_hat * (h / params.mass);
  out.state.p_hat = f.p_hat + (params.hbar / params.coupling_D) * d_eta;
  out.state.eta_integral = f.eta_integral + d_eta;
  out.state.time = f.time + h;
  return out;
}

double error_oscillator_analytic(double t, const PhysicalParams& params) {
  if (params.force_alpha == 0.0) return 0.0;
  const double half_phase = 0.5 * omega0(params) * t;
  const double s = std::sin(half_phase);
  return (params.force_alpha * params.coupling_D / params.hbar) * 2.0 * s * s;
}

double integrate_innovation(std::span<const double> etas, double dt) {
  // Neumaier-compensated sum.
  double sum = 0.0;
  double comp = 0.0;
  for (const double eta : etas) {
    const double t = sum + eta;
    if (std::abs(sum) >= std::abs(eta)) {
      comp += (sum - t) + eta;
    } else {
      comp += (eta - t) + sum;
    }
    sum = t;
  }
  return (sum + comp) * dt;
}

FilterTrace run_filter_continuous(const PhysicalParams& params, const Trajectory& traj,
                                  double x_hat0, double p_hat0) {
  const PhysicalParams p = validate_params(params);
  const std::vector<double> d_xi = record_increments(traj);
  const double h = traj.step_h;

  FilterTrace trace;
  trace.states.reserve(traj.states.size());
  trace.innovations.reserve(d_xi.size());

  FilterState f;
  f.x_hat = x_hat0;
  f.p_hat = p_hat0;
  f.e = traj.states.front().x - f.x_hat;
  trace.states.push_back(f);

  for (std::size_t k = 0; k < d_xi.size(); ++k) {
    ContinuousFilterStep step = filter_step_continuous(f, d_xi[k], p, h);
    f = step.state;
    f.e = traj.states[k + 1].x - f.x_hat;
    f.time = traj.times[k + 1];
    trace.states.push_back(f);
    trace.innovations.push_back(step.d_eta);
  }
  return trace;
}

FilterTrace run_filter_discrete(const PhysicalParams& params, double C,
                                const MeasurementRecord& record,
                                const ChainTrajectory* truth, double x_hat0,
                                double p_hat0) {
  const PhysicalParams p = validate_params(params);
  if (!p.discrete_mode()) {
    throw ConfigError("MissingRequired(tau)", "discrete filter needs discrete mode");
  }

  FilterTrace trace;
  trace.states.reserve(record.outcomes.size() + 1);
  trace.innovations.reserve(record.outcomes.size());

  FilterState f;
  f.x_hat = x_hat0;
  f.p_hat = p_hat0;
  if (truth != nullptr) f.e = truth->states.front().moments.x_mean - f.x_hat;
  trace.states.push_back(f);

  for (std::size_t r = 0; r < record.outcomes.size(); ++r) {
    DiscreteFilterStep step = filter_step_discrete(f, record.outcomes[r], p, C);
    f = step.state;
    if (truth != nullptr && r + 1 < truth->states.size()) {
      f.e = truth->states[r + 1].moments.x_mean - f.x_hat;
    }
    f.time = record.times[r];
    trace.states.push_back(f);
    trace.innovations.push_back(step.innovation);
  }
  return trace;
}

DetectionResult detect_force(std::span<const double> d_xi, double h,
                             const PhysicalParams& params, double t) {
  const PhysicalParams p = validate_params(params);
  if (!(t > 0.0) || !(h > 0.0)) {
    throw ConfigError("NonPositive(t)", "detect_force needs t > 0 and h > 0");
  }
  const auto n_steps = static_cast<std::size_t>(std::llround(t / h));
  if (n_steps < 1 || n_steps > d_xi.size()) {
    throw ConfigError("RecordTooShort",
                      "record does not span the requested detection time");
  }

  FilterState f;
  for (std::size_t k = 0; k < n_steps; ++k) {
    f = filter_step_continuous(f, d_xi[k], p, h).state;
  }
  const double span = static_cast<double>(n_steps) * h;
  const double noise = std::sqrt(p.coupling_D * span / 2.0);

  DetectionResult out;
  out.statistic = std::abs(f.eta_integral) / noise;
  out.detected = out.statistic >= 1.0;
  return out;
}

}  // namespace sqlsim
