#include "sqlsim/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sqlsim/analysis.hpp"
#include "sqlsim/csv.hpp"
#include "sqlsim/discrete_chain.hpp"
#include "sqlsim/estimator.hpp"
#include "sqlsim/parallel.hpp"
#include "sqlsim/sde_engine.hpp"
#include "sqlsim/svg.hpp"

namespace sqlsim {

namespace {

namespace fs = std::filesystem;

std::string out_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw IoError("DirectoryCreateFailed", c.out_dir + ": " + ec.message());
}

void write_manifest(const RunConfig& c) {
  const std::string path = out_path(c, "manifest.txt");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("FileOpenFailed", "cannot open " + path);
  out << manifest_text(c);
  if (!out) throw IoError("WriteFailed", path);
}

void note(const RunConfig& c, const std::string& message) {
  if (!c.quiet) std::cout << message << '\n';
}

std::size_t sde_step_count(const RunConfig& c) {
  return static_cast<std::size_t>(std::ceil(c.t_final / c.step_h - 1e-9));
}

void write_kv_csv(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& rows) {
  CsvWriter csv(path);
  csv.row({"key", "value"});
  for (const auto& [k, v] : rows) csv.row({k, v});
}

void run_simulate_sde(const RunConfig& c) {
  const PhysicalParams p = params_from_config(c, /*discrete=*/false);
  CsvWriter csv(out_path(c, "sde_trajectories.csv"));
  csv.row({"time_s", "x_m", "p_kgms", "xi_integral_ms", "trajectory_id"});

  Trajectory traj;
  for (std::uint64_t i = 0; i < c.trajectories; ++i) {
    integrate_into(traj, p, c.t_final, c.step_h, derive_stream_seed(c.seed, i));
    for (std::size_t k = 0; k < traj.states.size(); k += c.decimate) {
      const SdeState& s = traj.states[k];
      csv.row({format_double17(traj.times[k]), format_double17(s.x),
               format_double17(s.p), format_double17(s.xi_integral), format_u64(i)});
    }
  }
  note(c, "wrote " + out_path(c, "sde_trajectories.csv"));
}

void run_simulate_discrete(const RunConfig& c) {
  const PhysicalParams p = params_from_config(c, /*discrete=*/true);
  const auto n_steps =
      static_cast<std::uint64_t>(std::ceil(c.t_final / c.tau - 1e-9));
  CsvWriter csv(out_path(c, "discrete_chain.csv"));
  csv.row({"time_s", "x_m", "p_kgms", "premeasure_x_m", "xi_m", "innovation_m",
           "trajectory_id"});

  // Fail fast on pathological widths (honors the configured iteration cap).
  (void)stationary_widths(p, FixedPointOptions{1e-12, c.fixed_point_max_iters});

  for (std::uint64_t i = 0; i < c.trajectories; ++i) {
    const ChainRun run = simulate_chain(p, n_steps, derive_stream_seed(c.seed, i));
    for (std::size_t r = 1; r < run.trajectory.states.size(); r += c.decimate) {
      const ChainState& s = run.trajectory.states[r];
      csv.row({format_double17(s.time), format_double17(s.moments.x_mean),
               format_double17(s.moments.p_mean), format_double17(s.premeasure_x),
               format_double17(run.record.outcomes[r - 1]),
               format_double17(run.record.innovations_true[r - 1]), format_u64(i)});
    }
  }
  note(c, "wrote " + out_path(c, "discrete_chain.csv"));
}

void run_filter(const RunConfig& c) {
  const PhysicalParams p = params_from_config(c, /*discrete=*/false);
  CsvWriter csv(out_path(c, "filter.csv"));
  csv.row({"time_s", "x_m", "p_kgms", "x_hat_m", "p_hat_kgms", "e_m",
           "eta_integral_ms", "trajectory_id"});

  Trajectory traj;
  for (std::uint64_t i = 0; i < c.trajectories; ++i) {
    integrate_into(traj, p, c.t_final, c.step_h, derive_stream_seed(c.seed, i));
    const FilterTrace trace = run_filter_continuous(p, traj);
    for (std::size_t k = 0; k < trace.states.size(); k += c.decimate) {
      const FilterState& f = trace.states[k];
      const SdeState& s = traj.states[k];
      csv.row({format_double17(traj.times[k]), format_double17(s.x),
               format_double17(s.p), format_double17(f.x_hat),
               format_double17(f.p_hat), format_double17(f.e),
               format_double17(f.eta_integral), format_u64(i)});
    }
  }
  note(c, "wrote " + out_path(c, "filter.csv"));
}

void run_force_detect(const RunConfig& c) {
  const PhysicalParams p = params_from_config(c, /*discrete=*/false);
  const unsigned threads = threads_from_env();
  const std::size_t n = c.trajectories;

  std::vector<double> statistic(n);
  parallel_for(n, threads, [&](std::size_t i) {
    thread_local Trajectory traj;
    integrate_into(traj, p, c.t_final, c.step_h, derive_stream_seed(c.seed, i));
    const std::vector<double> d_xi = record_increments(traj);
    statistic[i] = detect_force(d_xi, c.step_h, p, c.t_final).statistic;
  });

  CsvWriter csv(out_path(c, "detection.csv"));
  csv.row({"trajectory_id", "statistic", "detected"});
  KahanSum mean;
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool detected = statistic[i] >= 1.0;
    hits += detected ? 1u : 0u;
    mean.add(statistic[i]);
    csv.row({format_u64(i), format_double17(statistic[i]), detected ? "1" : "0"});
  }

  const SignalNoise sn = signal_noise(p.force_alpha, p.coupling_D, c.t_final, p);
  const double snr = sn.noise > 0.0 ? sn.sigma / sn.noise : 0.0;
  write_kv_csv(out_path(c, "detection_summary.csv"),
               {
                   {"trajectories", format_u64(c.trajectories)},
                   {"force_alpha_N", format_double17(p.force_alpha)},
                   {"sigma_signal_ms", format_double17(sn.sigma)},
                   {"noise_ms", format_double17(sn.noise)},
                   {"snr", format_double17(snr)},
                   {"mean_statistic", format_double17(mean.value() / double(n))},
                   {"expected_mean_statistic",
                    format_double17(folded_normal_mean(snr, 1.0))},
                   {"detection_rate",
                    format_double17(double(hits) / double(n))},
                   {"threshold", "1"},
               });
  note(c, "wrote " + out_path(c, "detection.csv") + " (mean statistic " +
              format_double17(mean.value() / double(n)) + ")");
}

void run_sql_report(const RunConfig& c) {
  const PhysicalParams p = params_from_config(c, /*discrete=*/false);
  const SqlReport r = build_sql_report(p, c.t_final);

  write_kv_csv(out_path(c, "sql_report.csv"),
               {
                   {"t_s", format_double17(r.t)},
                   {"omega0_rad_s", format_double17(r.omega0)},
                   {"noise_floor_m", format_double17(r.noise_floor)},
                   {"t_star_s", format_double17(r.t_star)},
                   {"xrms_at_tstar_m", format_double17(r.xrms_at_tstar)},
                   {"sensitivity_bound", format_double17(r.sensitivity_bound)},
                   {"id_product_lhs", format_double17(r.id_lhs)},
                   {"id_product_rhs", format_double17(r.id_rhs)},
                   {"sigma_at_t_ms", format_double17(r.sigma_at_t)},
                   {"noise_at_t_ms", format_double17(r.noise_at_t)},
                   {"alpha_min_at_D_N", format_double17(r.alpha_min_at_d)},
                   {"d_optimal_m2s", format_double17(r.d_optimal)},
                   {"eta_star", format_double17(r.eta_star)},
                   {"g_max", format_double17(r.g_max)},
                   {"alpha_min_sql_N", format_double17(r.alpha_min_sql)},
                   {"folded_snr1_mean", format_double17(r.folded_snr1_mean)},
               });
  note(c, "sql-report: noise_floor=" + format_double17(r.noise_floor) +
              " m, t_star=" + format_double17(r.t_star) +
              " s, alpha_min=" + format_double17(r.alpha_min_sql) +
              " N, eta_star=" + format_double17(r.eta_star));
  note(c, "wrote " + out_path(c, "sql_report.csv"));
}

void run_sweep(const RunConfig& c) {
  const auto& g = c.grid;
  const std::uint64_t total = g.m_count * g.d_count * g.b_count;
  if (total == 0) {
    throw ConfigError("GridEmpty", "sweep grid has zero points");
  }
  const std::pair<double, const char*> bounds[] = {
      {g.m_min, "m_min"}, {g.m_max, "m_max"}, {g.d_min, "d_min"},
      {g.d_max, "d_max"}, {g.b_min, "b_min"}, {g.b_max, "b_max"}};
  for (const auto& [value, name] : bounds) {
    if (!(value > 0.0)) {
      throw ConfigError(std::string("NonPositive(") + name + ")",
                        "sweep bounds must be positive");
    }
  }

  const auto grid_value = [](double lo, double hi, std::uint64_t count,
                             std::uint64_t i) {
    if (count == 1) return lo;
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    return std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  };

  CsvWriter csv(out_path(c, "sweep.csv"));
  csv.row({"mass_kg", "coupling_D_m2s", "bandwidth_B_hz", "omega0_rad_s",
           "noise_floor_m", "t_star_s", "xrms_at_tstar_m", "sensitivity_bound",
           "alpha_min_sql_N"});
  PhysicalParams p;
  p.hbar = c.hbar;
  p.force_alpha = 0.0;
  for (std::uint64_t im = 0; im < g.m_count; ++im) {
    p.mass = grid_value(g.m_min, g.m_max, g.m_count, im);
    for (std::uint64_t id = 0; id < g.d_count; ++id) {
      p.coupling_D = grid_value(g.d_min, g.d_max, g.d_count, id);
      for (std::uint64_t ib = 0; ib < g.b_count; ++ib) {
        p.bandwidth_B = grid_value(g.b_min, g.b_max, g.b_count, ib);
        const double tstar = crossing_time(p);
        csv.row({format_double17(p.mass), format_double17(p.coupling_D),
                 format_double17(p.bandwidth_B), format_double17(omega0(p)),
                 format_double17(noise_floor(p.coupling_D, p.bandwidth_B)),
                 format_double17(tstar), format_double17(xrms_analytic(tstar, p)),
                 format_double17(sensitivity_bound(p.mass, p.hbar)),
                 format_double17(alpha_min_sql(p.mass, c.t_final, p.hbar))});
      }
    }
  }
  note(c, "wrote " + out_path(c, "sweep.csv") + " (" + format_u64(total) + " points)");
}

void run_figure1(const RunConfig& c) {
  const PhysicalParams p_sde = params_from_config(c, /*discrete=*/false);
  const PhysicalParams p_disc = params_from_config(c, /*discrete=*/true);
  const unsigned threads = threads_from_env();

  const double floor = noise_floor(p_sde.coupling_D, p_sde.bandwidth_B);
  const double t_star = crossing_time(p_sde);

  const std::size_t n_steps = sde_step_count(c);
  const auto window =
      static_cast<std::size_t>(std::llround(1.0 / (p_sde.bandwidth_B * c.step_h)));
  if (window < 1) {
    throw ConfigError("WindowTooShort", "step_h exceeds the bandwidth window 1/B");
  }
  const std::size_t n_windows = n_steps / window;
  if (n_windows < 2) {
    throw ConfigError("WindowTooShort", "t_final spans fewer than two windows of 1/B");
  }

  // Two displayed realizations from master seeds (seed, seed + 1).
  std::vector<std::vector<double>> signals(2);
  for (int i = 0; i < 2; ++i) {
    const Trajectory traj = integrate(p_sde, c.t_final, c.step_h,
                                      derive_stream_seed(c.seed + std::uint64_t(i), 0));
    const std::vector<double> d_xi = record_increments(traj);
    const std::vector<double> sums = window_means(d_xi, window);
    signals[i].resize(sums.size());
    for (std::size_t w = 0; w < sums.size(); ++w) {
      signals[i][w] = sums[w] / c.step_h;  // mean of d_xi / h = windowed record rate
    }
  }

  // Statistical overlay: empirical x_rms at the window centers.
  std::vector<std::size_t> center(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) center[w] = w * window + window / 2;
  std::vector<double> x2(c.trajectories * n_windows);
  parallel_for(c.trajectories, threads, [&](std::size_t i) {
    thread_local Trajectory traj;
    integrate_into(traj, p_sde, c.t_final, c.step_h, derive_stream_seed(c.seed, i));
    for (std::size_t w = 0; w < n_windows; ++w) {
      const double x = traj.states[center[w]].x;
      x2[i * n_windows + w] = x * x;
    }
  });
  std::vector<double> xrms_emp(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    KahanSum acc;
    for (std::size_t i = 0; i < c.trajectories; ++i) acc.add(x2[i * n_windows + w]);
    xrms_emp[w] = std::sqrt(acc.value() / static_cast<double>(c.trajectories));
  }

  std::vector<double> t_centers(n_windows), xrms_an(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    t_centers[w] = (static_cast<double>(w) + 0.5) * static_cast<double>(window) * c.step_h;
    xrms_an[w] = xrms_analytic(t_centers[w], p_sde);
  }

  {
    CsvWriter csv(out_path(c, "figure1a.csv"));
    csv.row({"time_s", "xrms_analytic_m", "xrms_empirical_m", "noise_floor_m",
             "signal1_m", "signal2_m"});
    for (std::size_t w = 0; w < n_windows; ++w) {
      csv.row({format_double17(t_centers[w]), format_double17(xrms_an[w]),
               format_double17(xrms_emp[w]), format_double17(floor),
               format_double17(signals[0][w]), format_double17(signals[1][w])});
    }
  }

  // Discrete chain + matched filter for the innovation panel.
  const auto n_chain =
      static_cast<std::uint64_t>(std::ceil(c.t_final / c.tau - 1e-9));
  const GaussianMoments widths = stationary_widths(
      p_disc, FixedPointOptions{1e-12, c.fixed_point_max_iters});
  const double eta_rms = chain_gains(p_disc, widths.contraction_C).innovation_sd;

  std::vector<std::vector<double>> etas(2), eta_times(2);
  for (int i = 0; i < 2; ++i) {
    const ChainRun run =
        simulate_chain(p_disc, n_chain, derive_stream_seed(c.seed + std::uint64_t(i), 0));
    const FilterTrace trace =
        run_filter_discrete(p_disc, widths.contraction_C, run.record,
                            &run.trajectory);
    for (std::size_t r = 0; r < trace.innovations.size(); r += c.decimate) {
      etas[i].push_back(trace.innovations[r]);
      eta_times[i].push_back(run.record.times[r]);
    }
  }

  {
    CsvWriter csv(out_path(c, "figure1b.csv"));
    csv.row({"time_s", "eta1_m", "eta2_m"});
    const std::size_t rows = std::min(etas[0].size(), etas[1].size());
    for (std::size_t r = 0; r < rows; ++r) {
      csv.row({format_double17(eta_times[0][r]), format_double17(etas[0][r]),
               format_double17(etas[1][r])});
    }
  }

  write_kv_csv(out_path(c, "figure1_summary.csv"),
               {
                   {"noise_floor_m", format_double17(floor)},
                   {"t_star_s", format_double17(t_star)},
                   {"omega0_rad_s", format_double17(omega0(p_sde))},
                   {"xrms_at_tstar_m", format_double17(xrms_analytic(t_star, p_sde))},
                   {"contraction_C", format_double17(widths.contraction_C)},
                   {"eta_rms_m", format_double17(eta_rms)},
                   {"window_samples", format_u64(window)},
                   {"n_windows", format_u64(n_windows)},
               });

  SvgPlot a;
  a.title = "Filtered record vs backaction diffusion";
  a.x_label = "time [s]";
  a.y_label = "position signal [m]";
  a.series.push_back({"signal (seed)", t_centers, signals[0], "#ff9f40", 1.0});
  a.series.push_back({"signal (seed+1)", t_centers, signals[1], "#4daf4a", 1.0});
  a.series.push_back({"x_rms analytic", t_centers, xrms_an, "#1f77b4", 2.0});
  {
    std::vector<double> neg(xrms_an.size());
    for (std::size_t i = 0; i < xrms_an.size(); ++i) neg[i] = -xrms_an[i];
    a.series.push_back({"", t_centers, neg, "#1f77b4", 2.0});
  }
  a.series.push_back({"x_rms ensemble", t_centers, xrms_emp, "#17becf", 1.5});
  a.markers.push_back({false, floor, "#888888", "+sqrt(DB/2)"});
  a.markers.push_back({false, -floor, "#888888", "-sqrt(DB/2)"});
  a.markers.push_back({true, t_star, "#d62728", "t*"});
  write_svg_plot(out_path(c, "figure1a.svg"), a);

  SvgPlot b;
  b.title = "Innovations after subtracting the filter prediction";
  b.x_label = "time [s]";
  b.y_label = "eta [m]";
  b.series.push_back({"eta (seed)", eta_times[0], etas[0], "#ff9f40", 0.8});
  b.series.push_back({"eta (seed+1)", eta_times[1], etas[1], "#4daf4a", 0.8});
  b.markers.push_back({false, eta_rms, "#888888", "+sqrt(sigma C/2)"});
  b.markers.push_back({false, -eta_rms, "#888888", "-sqrt(sigma C/2)"});
  write_svg_plot(out_path(c, "figure1b.svg"), b);

  note(c, "figure1: noise_floor=" + format_double17(floor) + " m, t_star=" +
              format_double17(t_star) + " s");
  note(c, "wrote figure1a.csv figure1a.svg figure1b.csv figure1b.svg in " + c.out_dir);
}

}  // namespace

unsigned threads_from_env() {
  const char* env = std::getenv("SQLSIM_THREADS");
  if (env == nullptr || *env == '\0') return default_thread_count();
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || value < 0) {
    throw ConfigError("TypeMismatch(SQLSIM_THREADS)",
                      "SQLSIM_THREADS must be a non-negative integer");
  }
  return value == 0 ? default_thread_count() : static_cast<unsigned>(value);
}

void run(const RunConfig& config) {
  ensure_out_dir(config);
  write_manifest(config);
  switch (config.mode) {
    case Mode::SimulateSde: run_simulate_sde(config); break;
    case Mode::SimulateDiscrete: run_simulate_discrete(config); break;
    case Mode::Filter: run_filter(config); break;
    case Mode::ForceDetect: run_force_detect(config); break;
    case Mode::SqlReportMode: run_sql_report(config); break;
    case Mode::Sweep: run_sweep(config); break;
    case Mode::Figure1: run_figure1(config); break;
  }
}

}  // namespace sqlsim
