#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sqlsim/model.hpp"
#include "sqlsim/rng.hpp"

namespace sqlsim {

/// State of the measurement chain just after the (r-1)th measurement.
/// premeasure_x is x'_r = x + p tau / m, the mean just before measurement r.
struct ChainState {
  GaussianMoments moments;
  double premeasure_x = 0.0;     // m
  std::uint64_t step_index = 0;  // r
  double time = 0.0;             // s
};

/// Meter outcomes xi_r and the innovations (xi_r - x'_r) actually consumed by
/// the chain. With alpha-free dynamics and exact bookkeeping the innovations
/// are i.i.d. Normal(0, sigma C / 2).
struct MeasurementRecord {
  std::vector<double> outcomes;          // xi_r, m
  std::vector<double> innovations_true;  // xi_r - x'_r, m
  std::vector<double> times;             // s
  double dt = 0.0;                       // tau, s
};

struct ChainTrajectory {
  std::vector<ChainState> states;
};

struct ChainRun {
  ChainTrajectory trajectory;
  MeasurementRecord record;
};

/// Gains of one stationary chain step. Both the truth chain and the recursive
/// estimator must consume exactly these values so a matched filter reproduces
/// the meter noise bit for bit.
struct ChainGains {
  double position_gain = 0.0;  // (C - 1) / C
  double momentum_kick = 0.0;  // hbar / (sigma sqrt(C)), kg m/s per m
  double innovation_sd = 0.0;  // sqrt(sigma C / 2), m
};

inline ChainGains chain_gains(const PhysicalParams& p, double C) {
  const double sigma = *p.sigma;
  return ChainGains{(C - 1.0) / C, p.hbar / (sigma * std::sqrt(C)),
                    std::sqrt(sigma * C / 2.0)};
}

/// Premeasure mean shared by the chain and the filter; keep this the single
/// expression both sides evaluate.
inline double premeasure_position(double x, double p_momentum, double tau, double mass) {
  return x + p_momentum * (tau / mass);
}

/// Ballistic evolution over tau: means drift (x += p tau/m + alpha tau^2/2m,
/// p += alpha tau), widths spread per the free Gaussian packet:
///   delta' = delta + 2 (hbar tau/m) eps + (hbar tau/m)^2 (1+eps^2)/delta
///   eps'   = eps + (hbar tau/(m delta)) (1+eps^2)
/// The spread preserves the purity closure exactly.
GaussianMoments free_evolution(const GaussianMoments& g, double tau,
                               const PhysicalParams& params);

/// Conditioning on outcome xi with meter width sigma. Posterior mean gains
/// k = delta/(delta+sigma) toward xi, momentum gains hbar eps/(delta+sigma),
/// and both widths contract by C = 1 + delta/sigma.
GaussianMoments gaussian_conditioning_update(const GaussianMoments& g, double sigma,
                                             double xi, const PhysicalParams& params);

struct FixedPointOptions {
  double rtol = 1e-12;
  int max_iters = 100000;
};

/// Fixed point of (free_evolution then conditioning) for (delta, eps), with the
/// stationary contraction factor in contraction_C. Plain fixed-point iteration
/// seeded at the continuous-limit solution delta = sqrt(2 hbar D / m), eps = 1.
/// Throws NumericalError(NoConvergence) when the iteration cap is hit.
GaussianMoments stationary_widths(const PhysicalParams& params,
                                  FixedPointOptions options = {});

/// One draw of (xi_r - x'_r) ~ Normal(0, sigma C / 2).
double sample_innovation(GaussianRng& rng, double sigma, double C);

/// Stationary difference equations; one innovation value feeds both lines:
///   x_{r+1} = x'_r + ((C-1)/C) innovation
///   p_{r+1} = p_r + alpha tau + (hbar/(sigma sqrt(C))) innovation
ChainState step_stationary(const ChainState& state, double innovation,
                           const PhysicalParams& params);

/// Full chain run, reproducible from the seed. Starts at the stationary widths
/// with x = p = 0 unless `initial` is given, in which case the full cycle
/// (free evolution + conditioning) is applied each step so width convergence
/// can be observed. The recorded innovation is recomputed as xi - x' from the
/// stored outcome, and exactly that value drives the update.
ChainRun simulate_chain(const PhysicalParams& params, std::uint64_t n_steps,
                        std::uint64_t seed,
                        std::optional<GaussianMoments> initial = std::nullopt);

/// Non-overlapping means of N = round(1/(B dt)) samples; output sampled at
/// rate ~B, times averaged per window. Throws ConfigError(WindowTooShort)
/// when N < 1. Trailing partial windows are dropped.
MeasurementRecord boxcar_filter(const MeasurementRecord& record, double B);

/// Means of consecutive full windows of `window` samples.
std::vector<double> window_means(std::span<const double> values, std::size_t window);

}  // namespace sqlsim
