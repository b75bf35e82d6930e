#include "sqlsim/model.hpp"

#include <cmath>
#include <string>

namespace sqlsim {

namespace {

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError("NonPositive(" + std::string(field) + ")",
                      std::string(field) + " must be a positive finite number");
  }
}

}  // namespace

PhysicalParams validate_params(PhysicalParams raw) {
  require_positive(raw.hbar, "hbar");
  require_positive(raw.mass, "mass");
  require_positive(raw.coupling_D, "coupling_D");
  require_positive(raw.bandwidth_B, "bandwidth_B");
  if (!std::isfinite(raw.force_alpha)) {
    throw ConfigError("NonFinite(force_alpha)", "force_alpha must be finite");
  }

  if (raw.sigma.has_value() && !raw.tau.has_value()) {
    throw ConfigError("MissingRequired(tau)",
                      "sigma was given without tau; discrete mode needs both");
  }

  if (raw.tau.has_value()) {
    require_positive(*raw.tau, "tau");
    if (!raw.sigma.has_value()) {
      raw.sigma = raw.coupling_D / *raw.tau;
    } else {
      require_positive(*raw.sigma, "sigma");
      const double residual =
          std::abs(*raw.sigma * *raw.tau - raw.coupling_D) / raw.coupling_D;
      if (residual > kSigmaTauRtol) {
        throw ConfigError("InconsistentDTS",
                          "sigma * tau differs from coupling_D by a relative " +
                              std::to_string(residual));
      }
    }
  }

  return raw;
}

}  // namespace sqlsim
