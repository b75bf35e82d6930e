#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "support.hpp"
#include "sqlsim/analysis.hpp"
#include "sqlsim/estimator.hpp"

using namespace sqlsim;

namespace {

PhysicalParams natural_sde(double alpha = 0.0, double D = 1.0) {
  PhysicalParams p;
  p.hbar = 1.0;
  p.mass = 1.0;
  p.coupling_D = D;
  p.bandwidth_B = 1.0;
  p.force_alpha = alpha;
  return validate_params(p);
}

PhysicalParams natural_chain(double tau, double alpha = 0.0) {
  PhysicalParams p = natural_sde(alpha);
  p.tau = tau;
  return validate_params(p);
}

bool bitwise_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

Trajectory zero_noise_trajectory(const PhysicalParams& p, double t, double h) {
  const auto n = static_cast<std::size_t>(std::llround(t / h));
  return integrate_with_stream(p, t, h, zero_noise_stream(n, h));
}

}  // namespace

TEST_CASE("perfect subtraction: matched filter returns the meter noise bit for bit") {
  const PhysicalParams p = natural_chain(0.01);
  const GaussianMoments w = stationary_widths(p);
  const ChainRun run = simulate_chain(p, 10000, 0xFEEDBEEF);
  const FilterTrace trace =
      run_filter_discrete(p, w.contraction_C, run.record, &run.trajectory);

  REQUIRE(trace.innovations.size() == run.record.innovations_true.size());
  for (std::size_t r = 0; r < trace.innovations.size(); ++r) {
    REQUIRE(bitwise_equal(trace.innovations[r], run.record.innovations_true[r]));
  }
  // Estimation error is identically zero along the way.
  for (const FilterState& f : trace.states) REQUIRE(f.e == 0.0);

  // Sample variance at sigma C / 2.
  double sum2 = 0.0;
  for (const double eta : trace.innovations) sum2 += eta * eta;
  const double expected = *p.sigma * w.contraction_C / 2.0;
  CHECK(sum2 / double(trace.innovations.size()) ==
        doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("discrete filter: an unsurprising outcome only drifts the estimate") {
  const PhysicalParams p = natural_chain(0.25);
  const GaussianMoments w = stationary_widths(p);
  FilterState f;
  f.x_hat = 1.0;
  f.p_hat = 2.0;
  const double x_hat_prime = f.x_hat + f.p_hat * (*p.tau / p.mass);
  const DiscreteFilterStep step = filter_step_discrete(f, x_hat_prime, p, w.contraction_C);
  CHECK(step.innovation == 0.0);
  CHECK(step.state.x_hat == x_hat_prime);
  CHECK(step.state.p_hat == f.p_hat);
}

TEST_CASE("with a force, the innovation mean develops the nonstationary error path") {
  // Linearity: the ensemble mean of eta_r equals the zero-noise path of the
  // coupled truth/filter recursion. At small omega0 t that path coincides with
  // the continuous error oscillator; at later times the discrete filter's
  // position gain damps the oscillation (the continuous filter has no
  // innovation term in its x_hat line, so it stays undamped).
  const double tau = 0.005;
  const double alpha = 20.0;
  const PhysicalParams p = natural_chain(tau, alpha);
  const GaussianMoments w = stationary_widths(p);
  const int n_traj = 400;
  const int n_steps = 600;  // t up to 3, omega0 = 1

  // Zero-noise path: xi_r = x'_r exactly, so eta_r = x'_r - x_hat'_r.
  std::vector<double> noiseless_eta(n_steps);
  {
    ChainState truth;
    truth.moments = w;
    FilterState f;
    for (int r = 0; r < n_steps; ++r) {
      const ChainState next = step_stationary(truth, 0.0, p);
      const DiscreteFilterStep step =
          filter_step_discrete(f, next.premeasure_x, p, w.contraction_C);
      noiseless_eta[r] = step.innovation;
      truth = next;
      f = step.state;
    }
  }

  std::vector<double> mean_eta(n_steps, 0.0);
  for (int i = 0; i < n_traj; ++i) {
    const ChainRun run = simulate_chain(p, n_steps, derive_stream_seed(0xE7A, i));
    const FilterTrace trace =
        run_filter_discrete(p, w.contraction_C, run.record, &run.trajectory);
    for (int r = 0; r < n_steps; ++r) mean_eta[r] += trace.innovations[r];
  }

  const double sem =
      std::sqrt(*p.sigma * w.contraction_C / 2.0) / std::sqrt(double(n_traj));
  for (const std::size_t check : {std::size_t(99), std::size_t(299), std::size_t(599)}) {
    CHECK(std::abs(mean_eta[check] / n_traj - noiseless_eta[check]) < 4.0 * sem);
  }
  // The mean is genuinely nonstationary: it climbs to the steady error scale.
  CHECK(noiseless_eta[n_steps - 1] > 0.5 * alpha * p.coupling_D / p.hbar);

  // Small-omega0-t agreement with the continuous error oscillator.
  const std::size_t early = 29;  // t = 0.15
  const double t_early = double(early + 1) * tau;
  CHECK(noiseless_eta[early] ==
        doctest::Approx(error_oscillator_analytic(t_early, p)).epsilon(0.10));
}

TEST_CASE("continuous filter: no surprise leaves p_hat; constant offset sets the gain") {
  const PhysicalParams p = natural_sde();
  const double h = 0.01;
  FilterState f;
  f.x_hat = 0.8;
  f.p_hat = -0.3;

  const ContinuousFilterStep quiet = filter_step_continuous(f, f.x_hat * h, p, h);
  CHECK(quiet.d_eta == 0.0);
  CHECK(quiet.state.p_hat == f.p_hat);
  CHECK(quiet.state.x_hat == doctest::Approx(f.x_hat + f.p_hat * h).epsilon(1e-15));

  // d_xi from a truth offset by e: dp_hat/dt = (hbar/D) e.
  const double e = 0.37;
  const ContinuousFilterStep kicked = filter_step_continuous(f, (f.x_hat + e) * h, p, h);
  CHECK((kicked.state.p_hat - f.p_hat) / h ==
        doctest::Approx(p.hbar / p.coupling_D * e).epsilon(1e-12));
}

TEST_CASE("alpha = 0: the accumulated innovation has variance (D/2) t") {
  const PhysicalParams p = natural_sde();
  const double t = 2.0;
  const double h = t / 1024.0;
  const int n = 500;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Trajectory traj = integrate(p, t, h, derive_stream_seed(0x1A7E, i));
    const FilterTrace trace = run_filter_continuous(p, traj);
    const double integral = trace.states.back().eta_integral;
    sum2 += integral * integral;
  }
  CHECK(sum2 / n == doctest::Approx(p.coupling_D / 2.0 * t).epsilon(0.12));
}

TEST_CASE("error_oscillator_analytic evaluates the closed form") {
  PhysicalParams p = natural_sde(0.0);
  CHECK(error_oscillator_analytic(0.0, p) == 0.0);
  CHECK(error_oscillator_analytic(7.3, p) == 0.0);  // alpha = 0

  PhysicalParams fig1;
  fig1.mass = 2.22e-25;
  fig1.coupling_D = 1.42e-20;
  fig1.bandwidth_B = 1e7;
  fig1.force_alpha = 1e-26;
  fig1 = validate_params(fig1);
  CHECK(omega0(fig1) == doctest::Approx(1.83e5).epsilon(5e-3));
  const double t = 1e-5;
  const double expected = fig1.force_alpha * fig1.coupling_D / fig1.hbar *
                          (1.0 - std::cos(omega0(fig1) * t));
  CHECK(error_oscillator_analytic(t, fig1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("noise-free filter reproduces the error oscillator with O(h) error") {
  const double alpha = 0.8;
  const PhysicalParams p = natural_sde(alpha);
  const double t_final = 3.141592653589793;  // one half period, omega0 = 1

  double prev_err = 0.0;
  for (const int n_steps : {4096, 8192}) {
    const double h = t_final / n_steps;
    const Trajectory traj = zero_noise_trajectory(p, t_final, h);
    const FilterTrace trace = run_filter_continuous(p, traj);
    double max_err = 0.0;
    for (std::size_t k = 0; k < trace.states.size(); ++k) {
      const double analytic = error_oscillator_analytic(traj.times[k], p);
      max_err = std::max(max_err, std::abs(trace.states[k].e - analytic));
    }
    const double rel = max_err / (2.0 * alpha * p.coupling_D / p.hbar);
    if (n_steps == 4096) {
      CHECK(rel < 2.5e-3);
      prev_err = rel;
    } else {
      CHECK(rel / prev_err == doctest::Approx(0.5).epsilon(0.4));
    }
  }
}

TEST_CASE("doubling D scales the error-oscillator period by sqrt(2)") {
  const double alpha = 1.0;
  double period_d1 = 0.0;
  for (const double d : {1.0, 2.0}) {
    const PhysicalParams p = natural_sde(alpha, d);
    const double w0 = omega0(p);
    const double t_final = 12.0;  // beyond one full period for both
    const double h = t_final / 16384.0;
    const Trajectory traj = zero_noise_trajectory(p, t_final, h);
    const FilterTrace trace = run_filter_continuous(p, traj);

    // First return of e to (near) zero after the peak: the period 2 pi / w0.
    std::size_t k_min = 0;
    double e_min = 1e300;
    for (std::size_t k = trace.states.size() / 4; k < trace.states.size(); ++k) {
      if (std::abs(trace.states[k].e) < e_min) {
        e_min = std::abs(trace.states[k].e);
        k_min = k;
      }
    }
    const double measured = traj.times[k_min];
    CHECK(measured == doctest::Approx(2.0 * M_PI / w0).epsilon(0.01));
    if (d == 1.0) {
      period_d1 = measured;
    } else {
      CHECK(measured / period_d1 == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
    }
  }
}

TEST_CASE("integrate_innovation: zeros, filter-consistency, and the Sigma(t) mean") {
  const std::vector<double> zeros(100, 0.0);
  CHECK(integrate_innovation(zeros, 0.1) == 0.0);

  // Discrete: matches the filter's own accumulator.
  const PhysicalParams pc = natural_chain(0.01);
  const GaussianMoments w = stationary_widths(pc);
  const ChainRun run = simulate_chain(pc, 2000, 0x77);
  const FilterTrace ft = run_filter_discrete(pc, w.contraction_C, run.record);
  CHECK(integrate_innovation(ft.innovations, *pc.tau) ==
        doctest::Approx(ft.states.back().eta_integral).epsilon(1e-12));

  // Noise-free forced run: the integral follows Sigma(t), and Sigma(t) itself
  // matches an independent quadrature of the analytic error curve.
  const double alpha = 0.8;
  const PhysicalParams p = natural_sde(alpha);
  const double t = 2.5;
  const double h = t / 8192.0;
  const Trajectory traj = zero_noise_trajectory(p, t, h);
  const FilterTrace trace = run_filter_continuous(p, traj);
  const double integral = trace.states.back().eta_integral;

  const double sigma_formula = signal_noise(alpha, p.coupling_D, t, p).sigma;
  const double sigma_quadrature = testsupport::simpson(
      [&](double s) { return error_oscillator_analytic(s, p); }, 0.0, t, 4096);
  CHECK(sigma_formula == doctest::Approx(sigma_quadrature).epsilon(1e-8));
  CHECK(integral == doctest::Approx(sigma_formula).epsilon(2e-3));
}

TEST_CASE("continuous innovations are white under alpha = 0") {
  const PhysicalParams p = natural_sde();
  const Trajectory traj = integrate(p, 8.0, 8.0 / 65536.0, 0xC0C0);
  const FilterTrace trace = run_filter_continuous(p, traj);
  const auto& d_eta = trace.innovations;
  const std::size_t n = d_eta.size();
  double mean = 0.0;
  for (const double v : d_eta) mean += v;
  mean /= double(n);
  double c0 = 0.0;
  for (const double v : d_eta) c0 += (v - mean) * (v - mean);
  for (int lag = 1; lag <= 10; ++lag) {
    double ck = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      ck += (d_eta[i] - mean) * (d_eta[i + lag] - mean);
    }
    CHECK(std::abs(ck / c0) < 3.0 / std::sqrt(double(n)));
  }
}

TEST_CASE("detect_force: errors, false positives, and strong-signal detection") {
  const double t = 1.0;
  const double d_opt = 1.0 / (M_PI * M_PI);  // eta*^2 hbar t^2 / m
  const PhysicalParams quietp = natural_sde(0.0, d_opt);
  const double h = t / 4096.0;

  // Record shorter than the detection horizon.
  const Trajectory tiny = integrate(quietp, t / 8.0, h, 0);
  CHECK_THROWS_WITH_AS(detect_force(record_increments(tiny), h, quietp, t),
                       doctest::Contains("RecordTooShort"), ConfigError);

  // alpha = 0: P(|N(0,1)| >= 1) = 0.3173, three-sigma binomial band.
  const int n = 1000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const Trajectory traj = integrate(quietp, t, h, derive_stream_seed(0xFA15E, i));
    if (detect_force(record_increments(traj), h, quietp, t).detected) ++hits;
  }
  const double rate = double(hits) / n;
  const double p0 = 0.3173105078629141;
  CHECK(std::abs(rate - p0) < 3.0 * std::sqrt(p0 * (1.0 - p0) / n));

  // alpha = 10 alpha_min: Sigma/N = 10, detection essentially certain.
  const double alpha10 = 10.0 * alpha_min_at_D(d_opt, t, quietp);
  const PhysicalParams loud = natural_sde(alpha10, d_opt);
  int detected = 0;
  const int n2 = 300;
  for (int i = 0; i < n2; ++i) {
    const Trajectory traj = integrate(loud, t, h, derive_stream_seed(0x10AD, i));
    if (detect_force(record_increments(traj), h, loud, t).detected) ++detected;
  }
  CHECK(double(detected) / n2 > 0.99);
}

TEST_CASE("detect_force at alpha_min: mean folded statistic near E|N(1,1)|") {
  const double t = 1.0;
  const double d_opt = 1.0 / (M_PI * M_PI);
  const PhysicalParams quietp = natural_sde(0.0, d_opt);
  const double alpha_min = alpha_min_at_D(d_opt, t, quietp);
  const PhysicalParams p = natural_sde(alpha_min, d_opt);
  const double h = t / 4096.0;

  const int n = 400;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Trajectory traj = integrate(p, t, h, derive_stream_seed(0xA1F4, i));
    sum += detect_force(record_increments(traj), h, p, t).statistic;
  }
  CHECK(sum / n == doctest::Approx(folded_normal_mean(1.0, 1.0)).epsilon(0.12));
}
