#include "sqlsim/discrete_chain.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sqlsim {

GaussianMoments free_evolution(const GaussianMoments& g, double tau,
                               const PhysicalParams& params) {
  if (!(tau >= 0.0)) {
    throw ConfigError("NonPositive(tau)", "free_evolution needs tau >= 0");
  }
  const double m = params.mass;
  const double spread = params.hbar * tau / m;  // hbar tau / m, m^2
  const double one_eps2 = 1.0 + g.epsilon * g.epsilon;

  GaussianMoments out = g;
  out.x_mean = g.x_mean + g.p_mean * (tau / m) +
               0.5 * params.force_alpha * tau * tau / m;
  out.p_mean = g.p_mean + params.force_alpha * tau;
  out.delta = g.delta + 2.0 * spread * g.epsilon + spread * spread * one_eps2 / g.delta;
  out.epsilon = g.epsilon + (spread / g.delta) * one_eps2;
  return out;
}

GaussianMoments gaussian_conditioning_update(const GaussianMoments& g, double sigma,
                                             double xi, const PhysicalParams& params) {
  if (!(sigma > 0.0)) {
    throw ConfigError("NonPositive(sigma)", "conditioning needs sigma > 0");
  }
  const double delta_prime = g.delta;
  const double C = 1.0 + delta_prime / sigma;
  const double gain = delta_prime / (delta_prime + sigma);  // equals (C-1)/C
  const double momentum_gain = params.hbar * g.epsilon / (delta_prime + sigma);
  const double residual = xi - g.x_mean;

  GaussianMoments out;
  out.x_mean = g.x_mean + gain * residual;
  out.p_mean = g.p_mean + momentum_gain * residual;
  out.delta = delta_prime / C;
  out.epsilon = g.epsilon / C;
  out.contraction_C = C;
  return out;
}

GaussianMoments stationary_widths(const PhysicalParams& params,
                                  FixedPointOptions options) {
  const PhysicalParams p = validate_params(params);
  if (!p.discrete_mode()) {
    throw ConfigError("MissingRequired(tau)", "stationary_widths needs discrete mode");
  }
  PhysicalParams free_params = p;
  free_params.force_alpha = 0.0;  // widths do not depend on the force
  const double sigma = *p.sigma;
  const double eps_mach = std::numeric_limits<double>::epsilon();

  GaussianMoments state;
  state.delta = std::sqrt(2.0 * p.hbar * p.coupling_D / p.mass);
  state.epsilon = 1.0;

  double prev_residual = -1.0;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    const GaussianMoments spread = free_evolution(state, *p.tau, free_params);
    const GaussianMoments next =
        gaussian_conditioning_update(spread, sigma, spread.x_mean, free_params);

    const double rd = std::abs(next.delta - state.delta) / state.delta;
    const double re = std::abs(next.epsilon - state.epsilon) /
                      std::max(std::abs(state.epsilon), 1e-300);
    const double residual = std::max(rd, re);
    if (!std::isfinite(residual)) break;

    state = next;
    if (residual <= 8.0 * eps_mach) return state;  // roundoff floor
    if (prev_residual > 0.0 && residual < prev_residual) {
      // Distance-to-fixed-point estimate for a geometric contraction.
      const double lambda = residual / prev_residual;
      if (residual * lambda / (1.0 - lambda) <= options.rtol) return state;
    }
    prev_residual = residual;
  }
  throw NumericalError("NoConvergence",
                       "stationary width iteration did not converge in " +
                           std::to_string(options.max_iters) + " iterations");
}

double sample_innovation(GaussianRng& rng, double sigma, double C) {
  return std::sqrt(sigma * C / 2.0) * rng.normal();
}

ChainState step_stationary(const ChainState& state, double innovation,
                           const PhysicalParams& params) {
  const double tau = *params.tau;
  const ChainGains gains = chain_gains(params, state.moments.contraction_C);
  const double x_prime = premeasure_position(state.moments.x_mean,
                                             state.moments.p_mean, tau, params.mass);

  ChainState next = state;
  next.premeasure_x = x_prime;
  next.moments.x_mean = x_prime + gains.position_gain * innovation;
  next.moments.p_mean = state.moments.p_mean + params.force_alpha * tau +
                        gains.momentum_kick * innovation;
  next.step_index = state.step_index + 1;
  next.time = static_cast<double>(next.step_index) * tau;
  return next;
}

ChainRun simulate_chain(const PhysicalParams& params, std::uint64_t n_steps,
                        std::uint64_t seed, std::optional<GaussianMoments> initial) {
  if (n_steps < 1) {
    throw ConfigError("NonPositive(n_steps)", "simulate_chain needs n_steps >= 1");
  }
  const PhysicalParams p = validate_params(params);
  if (!p.discrete_mode()) {
    throw ConfigError("MissingRequired(tau)", "simulate_chain needs discrete mode");
  }
  const double tau = *p.tau;
  const double sigma = *p.sigma;
  GaussianRng rng(seed);

  ChainRun run;
  run.record.dt = tau;
  run.record.outcomes.reserve(n_steps);
  run.record.innovations_true.reserve(n_steps);
  run.record.times.reserve(n_steps);
  run.trajectory.states.reserve(n_steps + 1);

  const bool stationary = !initial.has_value();
  ChainState state;
  state.moments = stationary ? stationary_widths(p) : *initial;
  run.trajectory.states.push_back(state);

  for (std::uint64_t r = 0; r < n_steps; ++r) {
    if (stationary) {
      const double x_prime = premeasure_position(state.moments.x_mean,
                                                 state.moments.p_mean, tau, p.mass);
      const double w = sample_innovation(rng, sigma, state.moments.contraction_C);
      const double xi = x_prime + w;
      const double innovation = xi - x_prime;  // the value the update consumes
      state = step_stationary(state, innovation, p);
      run.record.outcomes.push_back(xi);
      run.record.innovations_true.push_back(innovation);
    } else {
      const GaussianMoments spread = free_evolution(state.moments, tau, p);
      const double c_step = 1.0 + spread.delta / sigma;
      const double w = sample_innovation(rng, sigma, c_step);
      const double xi = spread.x_mean + w;
      state.premeasure_x = spread.x_mean;
      state.moments = gaussian_conditioning_update(spread, sigma, xi, p);
      state.step_index += 1;
      state.time = static_cast<double>(state.step_index) * tau;
      run.record.outcomes.push_back(xi);
      run.record.innovations_true.push_back(xi - spread.x_mean);
    }
    run.record.times.push_back(state.time);
    run.trajectory.states.push_back(state);
  }
  return run;
}

std::vector<double> window_means(std::span<const double> values, std::size_t window) {
  std::vector<double> out;
  if (window == 0) return out;
  const std::size_t n_windows = values.size() / window;
  out.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    double sum = 0.0;
    for (std::size_t k = 0; k < window; ++k) sum += values[w * window + k];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

MeasurementRecord boxcar_filter(const MeasurementRecord& record, double B) {
  if (!(B > 0.0)) {
    throw ConfigError("NonPositive(bandwidth_B)", "boxcar_filter needs B > 0");
  }
  if (!(record.dt > 0.0)) {
    throw ConfigError("NonPositive(dt)", "record carries no sample interval");
  }
  const long long n = std::llround(1.0 / (B * record.dt));
  if (n < 1) {
    throw ConfigError("WindowTooShort",
                      "bandwidth B exceeds the record sample rate (B dt > 1)");
  }
  const auto window = static_cast<std::size_t>(n);

  MeasurementRecord out;
  out.dt = record.dt * static_cast<double>(window);
  out.outcomes = window_means(record.outcomes, window);
  out.innovations_true = window_means(record.innovations_true, window);
  out.times = window_means(record.times, window);
  return out;
}

}  // namespace sqlsim
