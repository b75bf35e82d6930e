#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace sqlsim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stream seed for trajectory `index` of an ensemble keyed by `master`.
// Ensembles must give the same results whatever the thread schedule, so each
// trajectory owns a stream derived only from (master, index).
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  const std::uint64_t a = splitmix64(s);
  s = a + (index + 1) * 0xD1B54A32D192ED03ull;
  return splitmix64(s);
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_[4];
};

// Gaussian deviates via the Marsaglia polar method (sqrt/log only, no trig).
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * eng_.uniform01() - 1.0;
      v = 2.0 * eng_.uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  Xoshiro256pp& engine() { return eng_; }

 private:
  Xoshiro256pp eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct NoiseIncrement {
  double dt = 0.0;
  double dw = 0.0;  // ~ Normal(0, dt)
};

// One Wiener stream, bit-reproducible from its seed. The model's defining
// correlation: the dw of a step feeds both the momentum kick and the
// measurement-record increment.
struct NoiseStream {
  std::uint64_t seed = 0;
  std::vector<NoiseIncrement> increments;
};

inline NoiseStream make_noise_stream(std::uint64_t seed, std::size_t n, double dt) {
  NoiseStream out;
  out.seed = seed;
  out.increments.resize(n);
  GaussianRng rng(seed);
  const double sd = std::sqrt(dt);
  for (auto& inc : out.increments) {
    inc.dt = dt;
    inc.dw = sd * rng.normal();
  }
  return out;
}

inline NoiseStream zero_noise_stream(std::size_t n, double dt) {
  NoiseStream out;
  out.increments.assign(n, NoiseIncrement{dt, 0.0});
  return out;
}

}  // namespace sqlsim
