#pragma once

#include <cstdint>
#include <vector>

#include "sqlsim/model.hpp"
#include "sqlsim/rng.hpp"

namespace sqlsim {

/// Continuous-limit state. x changes only through p/m dt (no direct noise on
/// x); the record integral accumulates d_xi = x dt + sqrt(D/2) dW.
struct SdeState {
  double x = 0.0;            // m
  double p = 0.0;            // kg m/s
  double xi_integral = 0.0;  // m s
  double time = 0.0;         // s
};

/// Uniform-step trajectory; times[k] = k h computed as a product, never by
/// repeated addition. The noise stream that produced it rides along so the
/// record can be reconstructed increment by increment.
struct Trajectory {
  double step_h = 0.0;
  std::vector<double> times;
  std::vector<SdeState> states;
  NoiseStream noise;
};

/// One Euler-Maruyama step of
///   dx = (p/m) dt,  dp = alpha dt + sqrt(hbar^2/2D) dW,
///   d_xi = x dt + sqrt(D/2) dW,
/// with the SAME dW in dp and d_xi.
SdeState em_step(const SdeState& s, const PhysicalParams& params, double h, double dW);

/// ceil(t_final/h) steps from x = p = 0, reproducible from the seed (the seed
/// is used directly for this trajectory's stream; ensembles derive one seed
/// per trajectory). Throws ConfigError(StepTooLarge) when h > t_final.
Trajectory integrate(const PhysicalParams& params, double t_final, double h,
                     std::uint64_t seed);

/// Same, but reusing an existing trajectory's storage.
void integrate_into(Trajectory& out, const PhysicalParams& params, double t_final,
                    double h, std::uint64_t seed);

/// Integration driven by a caller-supplied stream (e.g. an all-zeros stream
/// for deterministic runs, or externally coupled increments).
Trajectory integrate_with_stream(const PhysicalParams& params, double t_final,
                                 double h, NoiseStream stream);

/// Per-step record increments d_xi, recovered from the accumulated record.
std::vector<double> record_increments(const Trajectory& traj);

/// Distribution-exact sampler for (x, p, xi_integral) over one step, from the
/// closed-form joint Gaussian of (dW, int W dt, int int W). Cross-check oracle
/// for the Euler-Maruyama path; not used by integrate().
class ExactStepper {
 public:
  ExactStepper(const PhysicalParams& params, double h);
  SdeState step(const SdeState& s, GaussianRng& rng) const;

 private:
  double h_;
  double mass_;
  double alpha_;
  double kick_;        // sqrt(hbar^2 / 2D)
  double record_sd_;   // sqrt(D / 2)
  double l11_, l21_, l22_, l31_, l32_, l33_;  // Cholesky of the (A,B1,B2) covariance
};

}  // namespace sqlsim
