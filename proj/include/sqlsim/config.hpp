#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "sqlsim/model.hpp"

namespace sqlsim {

enum class Mode {
  SimulateDiscrete,
  SimulateSde,
  Filter,
  ForceDetect,
  SqlReportMode,
  Sweep,
  Figure1,
};

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct SweepGrid {
  double m_min = 2.22e-25;
  double m_max = 2.22e-25;
  std::uint64_t m_count = 1;
  double d_min = 1.42e-20;
  double d_max = 1.42e-20;
  std::uint64_t d_count = 1;
  double b_min = 1e7;
  double b_max = 1e7;
  std::uint64_t b_count = 1;
};

/// Fully resolved run description; what the manifest echoes. A manifest is
/// itself a valid config file, so a run can be reproduced from it alone.
struct RunConfig {
  Mode mode = Mode::SqlReportMode;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::uint64_t trajectories = 1;
  double t_final = 0.0;  // 0 = mode default until resolve
  double step_h = 0.0;   // 0 = t_final / 2^14 (figure1: 1/(32 B))
  double tau = 0.0;      // 0 = t_final / 2^14 (figure1: 1/(100 B))
  double sigma = 0.0;    // 0 = coupling_D / tau
  double hbar = kDefaultHbar;
  double mass = 2.22e-25;
  double coupling_D = 1.42e-20;
  double bandwidth_B = 1e7;
  double force_alpha = 0.0;
  std::uint64_t decimate = 0;  // 0 = mode default (figure1: 100, else 1)
  bool quiet = false;
  int fixed_point_max_iters = 100000;
  SweepGrid grid;
};

/// Flag-provided overrides; only set fields participate in precedence
/// (defaults < config file < flags).
struct FlagOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> trajectories;
  std::optional<double> t_final;
  std::optional<double> step_h;
  std::optional<double> tau;
  std::optional<double> sigma;
  std::optional<double> hbar;
  std::optional<double> mass;
  std::optional<double> coupling_D;
  std::optional<double> bandwidth_B;
  std::optional<double> force_alpha;
  std::optional<std::uint64_t> decimate;
  std::optional<bool> quiet;
  std::optional<int> fixed_point_max_iters;
  std::optional<double> m_min, m_max, d_min, d_max, b_min, b_max;
  std::optional<std::uint64_t> m_count, d_count, b_count;
};

/// Flat key=value lines, '#' comments, blanks ignored.
/// Throws ConfigError(TypeMismatch(...)) on malformed lines.
std::map<std::string, std::string> load_config_file(const std::string& path);

/// defaults(mode) -> file values -> flags, then resolves the auto (0) fields
/// to concrete values. Unknown file keys raise UnknownKey, malformed numbers
/// TypeMismatch(key), a conflicting file mode ModeMismatch.
RunConfig build_run_config(Mode mode, const FlagOverrides& flags);

/// The resolved config as config-file text (the manifest body).
std::string manifest_text(const RunConfig& config);

/// Physical parameters for the run; discrete = true attaches (tau, sigma).
PhysicalParams params_from_config(const RunConfig& config, bool discrete);

}  // namespace sqlsim
