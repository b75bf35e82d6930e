#include "sqlsim/sde_engine.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

namespace sqlsim {

namespace {

std::size_t step_count(double t_final, double h) {
  if (!(h > 0.0)) {
    throw ConfigError("NonPositive(step_h)", "integration step must be > 0");
  }
  if (h > t_final) {
    throw ConfigError("StepTooLarge", "step h exceeds t_final");
  }
  // Tolerate t_final/h landing an ulp above an integer.
  return static_cast<std::size_t>(std::ceil(t_final / h - 1e-9));
}

void run_steps(Trajectory& out, const PhysicalParams& p, std::size_t n, double h) {
  out.step_h = h;
  out.times.resize(n + 1);
  out.states.resize(n + 1);
  SdeState s;
  out.times[0] = 0.0;
  out.states[0] = s;
  for (std::size_t k = 0; k < n; ++k) {
    s = em_step(s, p, h, out.noise.increments[k].dw);
    s.time = static_cast<double>(k + 1) * h;  // keep the grid exact
    out.times[k + 1] = s.time;
    out.states[k + 1] = s;
  }
}

}  // namespace

SdeState em_step(const SdeState& s, const PhysicalParams& params, double h, double dW) {
  const double kick = params.hbar / std::sqrt(2.0 * params.coupling_D);
  const double record_sd = std::sqrt(params.coupling_D / 2.0);
  SdeState next;
  next.x = s.x + s.p * (h / params.mass);
  next.p = s.p + params.force_alpha * h + kick * dW;
  next.xi_integral = s.xi_integral + s.x * h + record_sd * dW;
  next.time = s.time + h;
  return next;
}

void integrate_into(Trajectory& out, const PhysicalParams& params, double t_final,
                    double h, std::uint64_t seed) {
  const PhysicalParams p = validate_params(params);
  const std::size_t n = step_count(t_final, h);
  out.noise.seed = seed;
  out.noise.increments.resize(n);
  GaussianRng rng(seed);
  const double sd = std::sqrt(h);
  for (auto& inc : out.noise.increments) {
    inc.dt = h;
    inc.dw = sd * rng.normal();
  }
  run_steps(out, p, n, h);
}

Trajectory integrate(const PhysicalParams& params, double t_final, double h,
                     std::uint64_t seed) {
  Trajectory out;
  integrate_into(out, params, t_final, h, seed);
  return out;
}

Trajectory integrate_with_stream(const PhysicalParams& params, double t_final,
                                 double h, NoiseStream stream) {
  const PhysicalParams p = validate_params(params);
  const std::size_t n = step_count(t_final, h);
  if (stream.increments.size() < n) {
    throw ConfigError("RecordTooShort", "noise stream shorter than the step count");
  }
  Trajectory out;
  out.noise = std::move(stream);
  out.noise.increments.resize(n);
  run_steps(out, p, n, h);
  return out;
}

std::vector<double> record_increments(const Trajectory& traj) {
  std::vector<double> d_xi;
  if (traj.states.empty()) return d_xi;
  d_xi.resize(traj.states.size() - 1);
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    d_xi[k] = traj.states[k + 1].xi_integral - traj.states[k].xi_integral;
  }
  return d_xi;
}

ExactStepper::ExactStepper(const PhysicalParams& params, double h) : h_(h) {
  const PhysicalParams p = validate_params(params);
  if (!(h > 0.0)) {
    throw ConfigError("NonPositive(step_h)", "exact stepper needs h > 0");
  }
  mass_ = p.mass;
  alpha_ = p.force_alpha;
  kick_ = p.hbar / std::sqrt(2.0 * p.coupling_D);
  record_sd_ = std::sqrt(p.coupling_D / 2.0);
  // Covariance of A = int dW, B1 = int W dt, B2 = int int W over one step:
  //   [ h      h^2/2   h^3/6 ]
  //   [ h^2/2  h^3/3   h^4/8 ]
  //   [ h^3/6  h^4/8   h^5/20]
  // has the closed-form Cholesky factor below.
  const double h15 = h * std::sqrt(h);
  const double h25 = h * h * std::sqrt(h);
  l11_ = std::sqrt(h);
  l21_ = h15 / 2.0;
  l22_ = h15 / (2.0 * std::sqrt(3.0));
  l31_ = h25 / 6.0;
  l32_ = std::sqrt(3.0) * h25 / 12.0;
  l33_ = h25 / (12.0 * std::sqrt(5.0));
}

SdeState ExactStepper::step(const SdeState& s, GaussianRng& rng) const {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double z3 = rng.normal();
  const double a = l11_ * z1;
  const double b1 = l21_ * z1 + l22_ * z2;
  const double b2 = l31_ * z1 + l32_ * z2 + l33_ * z3;

  const double h = h_;
  SdeState next;
  next.p = s.p + alpha_ * h + kick_ * a;
  next.x = s.x + s.p * (h / mass_) + 0.5 * alpha_ * h * h / mass_ + (kick_ / mass_) * b1;
  next.xi_integral = s.xi_integral + s.x * h + s.p * h * h / (2.0 * mass_) +
                     alpha_ * h * h * h / (6.0 * mass_) + (kick_ / mass_) * b2 +
                     record_sd_ * a;
  next.time = s.time + h;
  return next;
}

}  // namespace sqlsim
