#include "sqlsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sqlsim/csv.hpp"

namespace sqlsim {

namespace {

constexpr std::uint64_t kStepsPow2 = 1u << 14;  // default grid: t_final / 2^14

double parse_double(const std::string& key, const std::string& text) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("TypeMismatch(" + key + ")",
                      "expected a number for " + key + ", got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  std::uint64_t value = 0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("TypeMismatch(" + key + ")",
                      "expected an unsigned integer for " + key + ", got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("TypeMismatch(" + key + ")",
                    "expected true/false for " + key + ", got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void apply_key(RunConfig& c, Mode mode, const std::string& key, const std::string& value) {
  if (key == "mode") {
    if (mode_from_name(value) != mode) {
      throw ConfigError("ModeMismatch", "config file mode '" + value +
                                            "' conflicts with subcommand '" +
                                            mode_name(mode) + "'");
    }
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "out_dir") {
    c.out_dir = value;
  } else if (key == "trajectories") {
    c.trajectories = parse_u64(key, value);
  } else if (key == "t_final") {
    c.t_final = parse_double(key, value);
  } else if (key == "step_h") {
    c.step_h = parse_double(key, value);
  } else if (key == "tau") {
    c.tau = parse_double(key, value);
  } else if (key == "sigma") {
    c.sigma = parse_double(key, value);
  } else if (key == "hbar") {
    c.hbar = parse_double(key, value);
  } else if (key == "mass") {
    c.mass = parse_double(key, value);
  } else if (key == "coupling_D") {
    c.coupling_D = parse_double(key, value);
  } else if (key == "bandwidth_B") {
    c.bandwidth_B = parse_double(key, value);
  } else if (key == "force_alpha") {
    c.force_alpha = parse_double(key, value);
  } else if (key == "decimate") {
    c.decimate = parse_u64(key, value);
  } else if (key == "quiet") {
    c.quiet = parse_bool(key, value);
  } else if (key == "fixed_point_max_iters") {
    c.fixed_point_max_iters = static_cast<int>(parse_u64(key, value));
  } else if (key == "m_min") {
    c.grid.m_min = parse_double(key, value);
  } else if (key == "m_max") {
    c.grid.m_max = parse_double(key, value);
  } else if (key == "m_count") {
    c.grid.m_count = parse_u64(key, value);
  } else if (key == "d_min") {
    c.grid.d_min = parse_double(key, value);
  } else if (key == "d_max") {
    c.grid.d_max = parse_double(key, value);
  } else if (key == "d_count") {
    c.grid.d_count = parse_u64(key, value);
  } else if (key == "b_min") {
    c.grid.b_min = parse_double(key, value);
  } else if (key == "b_max") {
    c.grid.b_max = parse_double(key, value);
  } else if (key == "b_count") {
    c.grid.b_count = parse_u64(key, value);
  } else {
    throw ConfigError("UnknownKey(" + key + ")", "unknown config key '" + key + "'");
  }
}

void apply_flags(RunConfig& c, const FlagOverrides& f) {
  if (f.seed) c.seed = *f.seed;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.trajectories) c.trajectories = *f.trajectories;
  if (f.t_final) c.t_final = *f.t_final;
  if (f.step_h) c.step_h = *f.step_h;
  if (f.tau) c.tau = *f.tau;
  if (f.sigma) c.sigma = *f.sigma;
  if (f.hbar) c.hbar = *f.hbar;
  if (f.mass) c.mass = *f.mass;
  if (f.coupling_D) c.coupling_D = *f.coupling_D;
  if (f.bandwidth_B) c.bandwidth_B = *f.bandwidth_B;
  if (f.force_alpha) c.force_alpha = *f.force_alpha;
  if (f.decimate) c.decimate = *f.decimate;
  if (f.quiet) c.quiet = *f.quiet;
  if (f.fixed_point_max_iters) c.fixed_point_max_iters = *f.fixed_point_max_iters;
  if (f.m_min) c.grid.m_min = *f.m_min;
  if (f.m_max) c.grid.m_max = *f.m_max;
  if (f.m_count) c.grid.m_count = *f.m_count;
  if (f.d_min) c.grid.d_min = *f.d_min;
  if (f.d_max) c.grid.d_max = *f.d_max;
  if (f.d_count) c.grid.d_count = *f.d_count;
  if (f.b_min) c.grid.b_min = *f.b_min;
  if (f.b_max) c.grid.b_max = *f.b_max;
  if (f.b_count) c.grid.b_count = *f.b_count;
}

void resolve_defaults(RunConfig& c) {
  if (!(c.bandwidth_B > 0.0)) {
    throw ConfigError("NonPositive(bandwidth_B)", "bandwidth_B must be positive");
  }
  if (c.t_final == 0.0) {
    c.t_final = c.mode == Mode::Figure1 ? 600.0 / c.bandwidth_B : 1.0;
  }
  if (!(c.t_final > 0.0)) {
    throw ConfigError("NonPositive(t_final)", "t_final must be positive");
  }
  if (c.step_h == 0.0) {
    c.step_h = c.mode == Mode::Figure1 ? 1.0 / (32.0 * c.bandwidth_B)
                                       : c.t_final / static_cast<double>(kStepsPow2);
  }
  if (c.tau == 0.0) {
    c.tau = c.mode == Mode::Figure1 ? 1.0 / (100.0 * c.bandwidth_B)
                                    : c.t_final / static_cast<double>(kStepsPow2);
  }
  if (c.sigma == 0.0) {
    if (!(c.tau > 0.0)) {
      throw ConfigError("NonPositive(tau)", "tau must be positive");
    }
    c.sigma = c.coupling_D / c.tau;
  }
  if (c.decimate == 0) {
    c.decimate = c.mode == Mode::Figure1 ? 100 : 1;
  }
  if (c.trajectories == 0) {
    throw ConfigError("NonPositive(trajectories)", "trajectories must be >= 1");
  }
}

}  // namespace

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::SimulateDiscrete: return "simulate-discrete";
    case Mode::SimulateSde: return "simulate-sde";
    case Mode::Filter: return "filter";
    case Mode::ForceDetect: return "force-detect";
    case Mode::SqlReportMode: return "sql-report";
    case Mode::Sweep: return "sweep";
    case Mode::Figure1: return "figure1";
  }
  return "unknown";
}

Mode mode_from_name(const std::string& name) {
  if (name == "simulate-discrete") return Mode::SimulateDiscrete;
  if (name == "simulate-sde") return Mode::SimulateSde;
  if (name == "filter") return Mode::Filter;
  if (name == "force-detect") return Mode::ForceDetect;
  if (name == "sql-report") return Mode::SqlReportMode;
  if (name == "sweep") return Mode::Sweep;
  if (name == "figure1") return Mode::Figure1;
  throw ConfigError("TypeMismatch(mode)", "unknown mode '" + name + "'");
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("FileOpenFailed", "cannot open config file " + path);

  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("TypeMismatch(line " + std::to_string(line_no) + ")",
                        "expected key=value in " + path);
    }
    out[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
  }
  return out;
}

RunConfig build_run_config(Mode mode, const FlagOverrides& flags) {
  RunConfig c;
  c.mode = mode;
  if (mode == Mode::ForceDetect || mode == Mode::Figure1) c.trajectories = 1000;
  c.t_final = 0.0;
  c.decimate = 0;

  if (flags.config_path) {
    for (const auto& [key, value] : load_config_file(*flags.config_path)) {
      apply_key(c, mode, key, value);
    }
  }
  apply_flags(c, flags);
  resolve_defaults(c);
  return c;
}

std::string manifest_text(const RunConfig& c) {
  std::ostringstream out;
  out << "# resolved run configuration; valid as --config input\n";
  out << "mode=" << mode_name(c.mode) << '\n';
  out << "seed=" << format_u64(c.seed) << '\n';
  out << "out_dir=" << c.out_dir << '\n';
  out << "trajectories=" << format_u64(c.trajectories) << '\n';
  out << "t_final=" << format_double17(c.t_final) << '\n';
  out << "step_h=" << format_double17(c.step_h) << '\n';
  out << "tau=" << format_double17(c.tau) << '\n';
  out << "sigma=" << format_double17(c.sigma) << '\n';
  out << "hbar=" << format_double17(c.hbar) << '\n';
  out << "mass=" << format_double17(c.mass) << '\n';
  out << "coupling_D=" << format_double17(c.coupling_D) << '\n';
  out << "bandwidth_B=" << format_double17(c.bandwidth_B) << '\n';
  out << "force_alpha=" << format_double17(c.force_alpha) << '\n';
  out << "decimate=" << format_u64(c.decimate) << '\n';
  out << "quiet=" << (c.quiet ? "true" : "false") << '\n';
  out << "fixed_point_max_iters=" << c.fixed_point_max_iters << '\n';
  out << "m_min=" << format_double17(c.grid.m_min) << '\n';
  out << "m_max=" << format_double17(c.grid.m_max) << '\n';
  out << "m_count=" << format_u64(c.grid.m_count) << '\n';
  out << "d_min=" << format_double17(c.grid.d_min) << '\n';
  out << "d_max=" << format_double17(c.grid.d_max) << '\n';
  out << "d_count=" << format_u64(c.grid.d_count) << '\n';
  out << "b_min=" << format_double17(c.grid.b_min) << '\n';
  out << "b_max=" << format_double17(c.grid.b_max) << '\n';
  out << "b_count=" << format_u64(c.grid.b_count) << '\n';
  return out.str();
}

PhysicalParams params_from_config(const RunConfig& c, bool discrete) {
  PhysicalParams p;
  p.hbar = c.hbar;
  p.mass = c.mass;
  p.coupling_D = c.coupling_D;
  p.bandwidth_B = c.bandwidth_B;
  p.force_alpha = c.force_alpha;
  if (discrete) {
    p.tau = c.tau;
    p.sigma = c.sigma;
  }
  return validate_params(p);
}

}  // namespace sqlsim
