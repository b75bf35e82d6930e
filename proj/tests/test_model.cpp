#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sqlsim/model.hpp"
#include "sqlsim/rng.hpp"

using namespace sqlsim;

namespace {

PhysicalParams fig1_params() {
  PhysicalParams p;
  p.mass = 2.22e-25;
  p.coupling_D = 1.42e-20;
  p.bandwidth_B = 1e7;
  return p;
}

}  // namespace

TEST_CASE("validate_params accepts the reference parameter set") {
  const PhysicalParams p = validate_params(fig1_params());
  CHECK(p.hbar == kDefaultHbar);
  CHECK(p.mass == 2.22e-25);
  CHECK_FALSE(p.discrete_mode());
}

TEST_CASE("validate_params fills sigma = D / tau") {
  PhysicalParams p;
  p.mass = 1.0;
  p.coupling_D = 1.0;
  p.bandwidth_B = 1.0;
  p.tau = 0.25;
  const PhysicalParams v = validate_params(p);
  REQUIRE(v.sigma.has_value());
  CHECK(*v.sigma == 4.0);
}

TEST_CASE("validate_params rejects degenerate inputs") {
  PhysicalParams p = fig1_params();
  p.mass = 0.0;
  CHECK_THROWS_WITH_AS(validate_params(p), doctest::Contains("NonPositive(mass)"),
                       ConfigError);

  p = fig1_params();
  p.coupling_D = -1.0;
  CHECK_THROWS_WITH_AS(validate_params(p), doctest::Contains("NonPositive(coupling_D)"),
                       ConfigError);

  p = fig1_params();
  p.bandwidth_B = 0.0;
  CHECK_THROWS_WITH_AS(validate_params(p),
                       doctest::Contains("NonPositive(bandwidth_B)"), ConfigError);

  p = fig1_params();
  p.force_alpha = std::nan("");
  CHECK_THROWS_WITH_AS(validate_params(p), doctest::Contains("NonFinite(force_alpha)"),
                       ConfigError);

  p = fig1_params();
  p.sigma = 1.0;  // sigma without tau
  CHECK_THROWS_WITH_AS(validate_params(p), doctest::Contains("MissingRequired(tau)"),
                       ConfigError);
}

TEST_CASE("validate_params flags inconsistent (D, tau, sigma)") {
  PhysicalParams p = fig1_params();
  p.tau = 1e-9;
  p.sigma = 1.42e-11 * (1.0 + 1e-9);  // off by 1e-9 relative
  CHECK_THROWS_WITH_AS(validate_params(p), doctest::Contains("InconsistentDTS"),
                       ConfigError);

  p.sigma = 1.42e-11 * (1.0 + 1e-13);  // inside the 1e-12 tolerance
  CHECK_NOTHROW(validate_params(p));
}

TEST_CASE("validate_params is idempotent and fill-in is self-consistent") {
  GaussianRng rng(0xC0FFEE01);
  for (int i = 0; i < 100; ++i) {
    PhysicalParams p;
    p.hbar = std::exp(rng.normal(0.0, 2.0));
    p.mass = std::exp(rng.normal(0.0, 2.0));
    p.coupling_D = std::exp(rng.normal(0.0, 2.0));
    p.bandwidth_B = std::exp(rng.normal(0.0, 2.0));
    p.force_alpha = rng.normal();
    p.tau = std::exp(rng.normal(0.0, 2.0));

    const PhysicalParams once = validate_params(p);
    const PhysicalParams twice = validate_params(once);
    CHECK(twice.hbar == once.hbar);
    CHECK(twice.mass == once.mass);
    CHECK(twice.coupling_D == once.coupling_D);
    CHECK(twice.bandwidth_B == once.bandwidth_B);
    CHECK(twice.force_alpha == once.force_alpha);
    CHECK(*twice.tau == *once.tau);
    CHECK(*twice.sigma == *once.sigma);

    // Discrete consistency: the filled sigma satisfies the validator's own
    // sigma * tau == D check with residual far below the tolerance.
    CHECK(std::abs(*once.sigma * *once.tau - once.coupling_D) <=
          2.0 * std::numeric_limits<double>::epsilon() * once.coupling_D);
  }
}

TEST_CASE("noise streams are reproducible and carry Normal(0, dt) increments") {
  const NoiseStream a = make_noise_stream(42, 20000, 0.25);
  const NoiseStream b = make_noise_stream(42, 20000, 0.25);
  REQUIRE(a.increments.size() == b.increments.size());
  for (std::size_t i = 0; i < a.increments.size(); ++i) {
    CHECK(a.increments[i].dw == b.increments[i].dw);
  }

  double sum = 0.0, sum2 = 0.0;
  for (const auto& inc : a.increments) {
    sum += inc.dw;
    sum2 += inc.dw * inc.dw;
  }
  const double n = static_cast<double>(a.increments.size());
  CHECK(std::abs(sum / n) < 3.0 * std::sqrt(0.25 / n));
  CHECK(sum2 / n == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("derived stream seeds differ across trajectory indices") {
  const std::uint64_t master = 7;
  CHECK(derive_stream_seed(master, 0) != derive_stream_seed(master, 1));
  CHECK(derive_stream_seed(master, 0) != derive_stream_seed(master + 1, 0));
}

TEST_CASE("momentum_variance encodes the pure-state closure") {
  GaussianMoments g;
  g.delta = 2.0;  // Vxx = 1
  g.epsilon = 0.0;
  // Minimum-uncertainty: Vxx * Vpp == hbar^2 / 4.
  CHECK(momentum_variance(g, 3.0) == doctest::Approx(9.0 / 4.0));
}
