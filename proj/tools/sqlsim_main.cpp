// sqlsim: continuous position-measurement simulator and SQL analysis CLI.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sqlsim/config.hpp"
#include "sqlsim/errors.hpp"
#include "sqlsim/runner.hpp"

namespace {

struct FlagCapture {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::uint64_t trajectories = 0;
  double t_final = 0.0;
  double step_h = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  double hbar = 0.0;
  double mass = 0.0;
  double coupling_D = 0.0;
  double bandwidth_B = 0.0;
  double force_alpha = 0.0;
  std::uint64_t decimate = 0;
  bool quiet = false;
  std::uint64_t fp_max_iters = 0;
  double m_min = 0.0, m_max = 0.0, d_min = 0.0, d_max = 0.0, b_min = 0.0, b_max = 0.0;
  std::uint64_t m_count = 0, d_count = 0, b_count = 0;
};

struct SubOptions {
  CLI::App* app = nullptr;
  CLI::Option* config = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* out_dir = nullptr;
  CLI::Option* trajectories = nullptr;
  CLI::Option* t_final = nullptr;
  CLI::Option* step_h = nullptr;
  CLI::Option* tau = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* hbar = nullptr;
  CLI::Option* mass = nullptr;
  CLI::Option* coupling_D = nullptr;
  CLI::Option* bandwidth_B = nullptr;
  CLI::Option* force_alpha = nullptr;
  CLI::Option* decimate = nullptr;
  CLI::Option* quiet = nullptr;
  CLI::Option* fp_max_iters = nullptr;
  CLI::Option* m_min = nullptr;
  CLI::Option* m_max = nullptr;
  CLI::Option* m_count = nullptr;
  CLI::Option* d_min = nullptr;
  CLI::Option* d_max = nullptr;
  CLI::Option* d_count = nullptr;
  CLI::Option* b_min = nullptr;
  CLI::Option* b_max = nullptr;
  CLI::Option* b_count = nullptr;
};

SubOptions add_subcommand(CLI::App& app, sqlsim::Mode mode, const char* description,
                          FlagCapture& flags) {
  SubOptions o;
  o.app = app.add_subcommand(sqlsim::mode_name(mode), description);
  o.config = o.app->add_option("--config", flags.config_path,
                               "key=value config file; flags override it");
  o.seed = o.app->add_option("--seed", flags.seed, "master 64-bit seed");
  o.out_dir = o.app->add_option("--out", flags.out_dir, "output directory");
  o.trajectories =
      o.app->add_option("--trajectories", flags.trajectories, "ensemble size");
  o.t_final = o.app->add_option("--t-final", flags.t_final, "run length [s]");
  o.step_h = o.app->add_option("--step", flags.step_h, "SDE step h [s]");
  o.tau = o.app->add_option("--tau", flags.tau, "measurement interval [s]");
  o.sigma = o.app->add_option("--sigma", flags.sigma, "meter width sigma [m^2]");
  o.hbar = o.app->add_option("--hbar", flags.hbar, "hbar [J s]");
  o.mass = o.app->add_option("--mass", flags.mass, "particle mass [kg]");
  o.coupling_D =
      o.app->add_option("--D", flags.coupling_D, "measurement coupling D [m^2 s]");
  o.bandwidth_B =
      o.app->add_option("--B", flags.bandwidth_B, "signal bandwidth B [Hz]");
  o.force_alpha = o.app->add_option("--alpha", flags.force_alpha, "force alpha [N]");
  o.decimate =
      o.app->add_option("--decimate", flags.decimate, "keep every k-th output row");
  o.quiet = o.app->add_flag("--quiet", flags.quiet, "suppress stdout summaries");
  o.fp_max_iters = o.app->add_option("--fp-max-iters", flags.fp_max_iters,
                                     "stationary width iteration cap");
  if (mode == sqlsim::Mode::Sweep) {
    o.m_min = o.app->add_option("--m-min", flags.m_min, "sweep mass lower bound");
    o.m_max = o.app->add_option("--m-max", flags.m_max, "sweep mass upper bound");
    o.m_count = o.app->add_option("--m-count", flags.m_count, "sweep mass points");
    o.d_min = o.app->add_option("--d-min", flags.d_min, "sweep D lower bound");
    o.d_max = o.app->add_option("--d-max", flags.d_max, "sweep D upper bound");
    o.d_count = o.app->add_option("--d-count", flags.d_count, "sweep D points");
    o.b_min = o.app->add_option("--b-min", flags.b_min, "sweep B lower bound");
    o.b_max = o.app->add_option("--b-max", flags.b_max, "sweep B upper bound");
    o.b_count = o.app->add_option("--b-count", flags.b_count, "sweep B points");
  }
  return o;
}

sqlsim::FlagOverrides collect(const SubOptions& o, const FlagCapture& f) {
  sqlsim::FlagOverrides out;
  const auto set_if = [](CLI::Option* opt, auto& slot, const auto& value) {
    if (opt != nullptr && opt->count() > 0) slot = value;
  };
  set_if(o.config, out.config_path, f.config_path);
  set_if(o.seed, out.seed, f.seed);
  set_if(o.out_dir, out.out_dir, f.out_dir);
  set_if(o.trajectories, out.trajectories, f.trajectories);
  set_if(o.t_final, out.t_final, f.t_final);
  set_if(o.step_h, out.step_h, f.step_h);
  set_if(o.tau, out.tau, f.tau);
  set_if(o.sigma, out.sigma, f.sigma);
  set_if(o.hbar, out.hbar, f.hbar);
  set_if(o.mass, out.mass, f.mass);
  set_if(o.coupling_D, out.coupling_D, f.coupling_D);
  set_if(o.bandwidth_B, out.bandwidth_B, f.bandwidth_B);
  set_if(o.force_alpha, out.force_alpha, f.force_alpha);
  set_if(o.decimate, out.decimate, f.decimate);
  set_if(o.quiet, out.quiet, f.quiet);
  if (o.fp_max_iters != nullptr && o.fp_max_iters->count() > 0) {
    out.fixed_point_max_iters = static_cast<int>(f.fp_max_iters);
  }
  set_if(o.m_min, out.m_min, f.m_min);
  set_if(o.m_max, out.m_max, f.m_max);
  set_if(o.m_count, out.m_count, f.m_count);
  set_if(o.d_min, out.d_min, f.d_min);
  set_if(o.d_max, out.d_max, f.d_max);
  set_if(o.d_count, out.d_count, f.d_count);
  set_if(o.b_min, out.b_min, f.b_min);
  set_if(o.b_max, out.b_max, f.b_max);
  set_if(o.b_count, out.b_count, f.b_count);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic simulator for broadband position measurement of a "
               "free mass, with innovation-based force detection and "
               "standard-quantum-limit analysis"};
  app.require_subcommand(0, 1);

  const std::vector<std::pair<sqlsim::Mode, const char*>> modes = {
      {sqlsim::Mode::SimulateDiscrete, "discrete measurement chain time series"},
      {sqlsim::Mode::SimulateSde, "continuous-limit SDE trajectories"},
      {sqlsim::Mode::Filter, "SDE trajectories with the recursive estimator"},
      {sqlsim::Mode::ForceDetect, "innovation-based force detection ensemble"},
      {sqlsim::Mode::SqlReportMode, "closed-form SQL quantities report"},
      {sqlsim::Mode::Sweep, "formula sweep over a (m, D, B) grid"},
      {sqlsim::Mode::Figure1, "noise-floor/diffusion picture and innovation panel"},
  };

  std::vector<FlagCapture> captures(modes.size());
  std::vector<SubOptions> options(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    options[i] = add_subcommand(app, modes[i].first, modes[i].second, captures[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::size_t chosen = modes.size();
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (options[i].app->parsed()) {
        chosen = i;
        break;
      }
    }
    if (chosen == modes.size()) {
      throw sqlsim::ConfigError("MissingRequired(mode)",
                                "a subcommand is required; see --help");
    }
    const sqlsim::RunConfig config = sqlsim::build_run_config(
        modes[chosen].first, collect(options[chosen], captures[chosen]));
    sqlsim::run(config);
    return 0;
  } catch (const sqlsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const sqlsim::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const sqlsim::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 3;
  }
}
