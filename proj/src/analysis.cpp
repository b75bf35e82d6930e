#include "sqlsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "sqlsim/rng.hpp"

namespace sqlsim {

double xrms_analytic(double t, const PhysicalParams& params) {
  if (!(t >= 0.0)) {
    throw ConfigError("NonPositive(t)", "xrms_analytic needs t >= 0");
  }
  return params.hbar / (params.mass * std::sqrt(6.0 * params.coupling_D)) *
         std::pow(t, 1.5);
}

double noise_floor(double D, double B) {
  return std::sqrt(D * B / 2.0);
}

double crossing_time(const PhysicalParams& params) {
  const double base =
      std::sqrt(3.0 * params.bandwidth_B) * params.coupling_D * params.mass / params.hbar;
  return std::pow(base, 2.0 / 3.0);
}

double sensitivity_bound(double mass, double hbar) {
  return std::pow(3.0, -0.25) * std::sqrt(hbar / mass);
}

IdProduct inference_disturbance_product(double D, double t,
                                        const PhysicalParams& params) {
  if (!(t > 0.0)) {
    throw ConfigError("NonPositive(t)", "inference_disturbance_product needs t > 0");
  }
  const double xrms = params.hbar / (params.mass * std::sqrt(6.0 * D)) * std::pow(t, 1.5);
  IdProduct out;
  out.lhs = noise_floor(D, 1.0 / t) * xrms;
  out.rhs = params.hbar * t / (2.0 * std::sqrt(3.0) * params.mass);
  return out;
}

SignalNoise signal_noise(double alpha, double D, double t,
                         const PhysicalParams& params) {
  if (!(t >= 0.0)) {
    throw ConfigError("NonPositive(t)", "signal_noise needs t >= 0");
  }
  const double w0 = std::sqrt(params.hbar / (params.mass * D));
  SignalNoise out;
  out.sigma = (alpha * D / params.hbar) * t * one_minus_sinc(w0 * t);
  out.noise = std::sqrt(D * t / 2.0);
  return out;
}

double alpha_min_at_D(double D, double t, const PhysicalParams& params) {
  if (!(t > 0.0)) {
    throw ConfigError("NonPositive(t)", "alpha_min_at_D needs t > 0");
  }
  const double w0 = std::sqrt(params.hbar / (params.mass * D));
  const double bracket = t * one_minus_sinc(w0 * t);
  if (!(std::abs(bracket) > 1e-30 * t)) {
    throw NumericalError("DegenerateDenominator",
                         "signal bracket vanishes at this (D, t)");
  }
  return params.hbar * std::sqrt(t / (2.0 * D)) / bracket;
}

double eta_objective(double eta) {
  return eta * one_minus_sinc(1.0 / eta);
}

EtaOptimum optimize_eta() {
  constexpr double kLo = 0.02;
  constexpr double kHi = 5.0;
  constexpr double kStep = 1e-3;

  double best_eta = kLo;
  double best_g = eta_objective(kLo);
  const auto n = static_cast<std::size_t>((kHi - kLo) / kStep) + 1;
  for (std::size_t i = 1; i < n; ++i) {
    const double eta = kLo + static_cast<double>(i) * kStep;
    const double g = eta_objective(eta);
    if (g > best_g) {
      best_g = g;
      best_eta = eta;
    }
  }

  const double lo = std::max(kLo, best_eta - kStep);
  const double hi = std::min(kHi, best_eta + kStep);
  const auto refined = golden_section_max(eta_objective, lo, hi, 1e-8);

  EtaOptimum out;
  out.eta_star = refined.x;
  out.g_max = refined.f;
  return out;
}

double alpha_min_sql(double mass, double t, double hbar) {
  static const EtaOptimum kOptimum = optimize_eta();
  return std::sqrt(hbar * mass / (2.0 * t * t * t)) / kOptimum.g_max;
}

double folded_normal_mean(double mu, double sigma) {
  constexpr double kSqrt2OverPi = 0.7978845608028654;
  const double z = mu / sigma;
  return sigma * kSqrt2OverPi * std::exp(-0.5 * z * z) +
         mu * std::erf(z / std::sqrt(2.0));
}

SqlReport build_sql_report(const PhysicalParams& params, double t) {
  const PhysicalParams p = validate_params(params);
  const EtaOptimum opt = optimize_eta();

  SqlReport r;
  r.t = t;
  r.omega0 = omega0(p);
  r.noise_floor = noise_floor(p.coupling_D, p.bandwidth_B);
  r.t_star = crossing_time(p);
  r.xrms_at_tstar = xrms_analytic(r.t_star, p);
  r.sensitivity_bound = sensitivity_bound(p.mass, p.hbar);
  const IdProduct id = inference_disturbance_product(p.coupling_D, t, p);
  r.id_lhs = id.lhs;
  r.id_rhs = id.rhs;
  const SignalNoise sn = signal_noise(p.force_alpha, p.coupling_D, t, p);
  r.sigma_at_t = sn.sigma;
  r.noise_at_t = sn.noise;
  r.alpha_min_at_d = alpha_min_at_D(p.coupling_D, t, p);
  r.eta_star = opt.eta_star;
  r.g_max = opt.g_max;
  r.d_optimal = opt.eta_star * opt.eta_star * p.hbar * t * t / p.mass;
  r.alpha_min_sql = alpha_min_sql(p.mass, t, p.hbar);
  r.folded_snr1_mean = folded_normal_mean(1.0, 1.0);
  return r;
}

EnsembleStats ensemble_stats(std::span<const Trajectory> trajectories,
                             std::span<const double> t_grid,
                             EnsembleOptions options) {
  const std::size_t n_traj = trajectories.size();
  if (n_traj < 2) {
    throw ConfigError("TooFewTrajectories", "ensemble statistics need >= 2 trajectories");
  }
  const double h = trajectories.front().step_h;
  const std::size_t n_steps = trajectories.front().states.size() - 1;
  const std::size_t n_grid = t_grid.size();

  std::vector<std::size_t> index(n_grid);
  for (std::size_t g = 0; g < n_grid; ++g) {
    const auto k = static_cast<std::size_t>(std::llround(t_grid[g] / h));
    index[g] = std::min(k, n_steps);
  }

  // Per-trajectory samples, gathered in trajectory order so the reduction is
  // independent of any parallel generation schedule upstream.
  std::vector<double> x2(n_traj * n_grid);
  std::vector<double> p1(n_traj * n_grid);
  std::vector<double> p2(n_traj * n_grid);
  for (std::size_t i = 0; i < n_traj; ++i) {
    const auto& states = trajectories[i].states;
    for (std::size_t g = 0; g < n_grid; ++g) {
      const SdeState& s = states[index[g]];
      x2[i * n_grid + g] = s.x * s.x;
      p1[i * n_grid + g] = s.p;
      p2[i * n_grid + g] = s.p * s.p;
    }
  }

  EnsembleStats out;
  out.t.assign(t_grid.begin(), t_grid.end());
  out.xrms.resize(n_grid);
  out.var_p.resize(n_grid);
  out.xrms_ci_lo.resize(n_grid);
  out.xrms_ci_hi.resize(n_grid);

  const double inv_n = 1.0 / static_cast<double>(n_traj);
  for (std::size_t g = 0; g < n_grid; ++g) {
    KahanSum sx2, sp, sp2;
    for (std::size_t i = 0; i < n_traj; ++i) {
      sx2.add(x2[i * n_grid + g]);
      sp.add(p1[i * n_grid + g]);
      sp2.add(p2[i * n_grid + g]);
    }
    const double mean_p = sp.value() * inv_n;
    out.xrms[g] = std::sqrt(sx2.value() * inv_n);
    out.var_p[g] = sp2.value() * inv_n - mean_p * mean_p;
  }

  // Percentile bootstrap: one set of resampled trajectory indices per round,
  // shared across the grid so the bands are consistent in time.
  const int rounds = std::max(options.bootstrap_rounds, 1);
  Xoshiro256pp rng(options.bootstrap_seed);
  std::vector<std::size_t> picks(static_cast<std::size_t>(rounds) * n_traj);
  for (auto& idx : picks) idx = static_cast<std::size_t>(rng.next() % n_traj);

  std::vector<double> resampled(static_cast<std::size_t>(rounds));
  for (std::size_t g = 0; g < n_grid; ++g) {
    for (int b = 0; b < rounds; ++b) {
      KahanSum acc;
      const std::size_t* round_picks = picks.data() + static_cast<std::size_t>(b) * n_traj;
      for (std::size_t i = 0; i < n_traj; ++i) {
        acc.add(x2[round_picks[i] * n_grid + g]);
      }
      resampled[static_cast<std::size_t>(b)] = std::sqrt(acc.value() * inv_n);
    }
    std::sort(resampled.begin(), resampled.end());
    const auto lo_idx = static_cast<std::size_t>(0.025 * (rounds - 1));
    const auto hi_idx = static_cast<std::size_t>(0.975 * (rounds - 1));
    out.xrms_ci_lo[g] = resampled[lo_idx];
    out.xrms_ci_hi[g] = resampled[hi_idx];
  }
  return out;
}

}  // namespace sqlsim
