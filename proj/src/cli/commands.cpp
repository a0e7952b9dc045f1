#include "rtaprop/cli/commands.hpp"

#include "rtaprop/baseline.hpp"
#include "rtaprop/cli/manifest.hpp"
#include "rtaprop/config.hpp"
#include "rtaprop/error.hpp"
#include "rtaprop/filter.hpp"
#include "rtaprop/geo.hpp"
#include "rtaprop/io.hpp"
#include "rtaprop/rta.hpp"
#include "rtaprop/spline.hpp"
#include "rtaprop/tuning.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace rtaprop::cli {

namespace fs = std::filesystem;

namespace {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("RTAPROP_LOG_LEVEL");
    const std::string v = env ? env : "";
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

template <class... Args>
void log(LogLevel level, fmt::format_string<Args...> f, Args&&... args) {
  if (level > log_level()) {
    return;
  }
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[rtaprop " << names[static_cast<int>(level)] << "] "
            << fmt::format(f, std::forward<Args>(args)...) << '\n';
}

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg = opts.config ? load_config(*opts.config) : RunConfig{};
  if (opts.seed) {
    cfg.set_seed(*opts.seed);
  }
  cfg.set_jobs(opts.jobs);
  cfg.validate();
  return cfg;
}

RunManifest start_manifest(const std::string& command, const RunConfig& cfg,
                           const CommonOptions& opts) {
  RunManifest m;
  m.command = command;
  m.config = config_snapshot(cfg);
  m.tool_version = kToolVersion;
  m.seed = cfg.mc.seed;
  if (opts.config) {
    m.add_input(*opts.config, "config:" + opts.config->filename().string());
  }
  return m;
}

class OutputDir {
public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, std::string_view content) {
    io::write_text_file(dir_ / name, content);
    names_.push_back(name);
  }
  template <class Fn>
  void write_with(const std::string& name, Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    write(name, ss.str());
  }
  void finish(RunManifest manifest) {
    manifest.outputs = names_;
    io::write_text_file(dir_ / "manifest.json", manifest.to_json());
  }
  const fs::path& path() const { return dir_; }

private:
  fs::path dir_;
  std::vector<std::string> names_;
};

struct PlanBundle {
  geo::LocalPlan plan;
  spline::TrajectorySpline spline;
};

PlanBundle load_plan(const fs::path& plan_file) {
  auto plan = geo::to_local_frame(geo::load_flight_plan(plan_file));
  auto spline = spline::fit_trajectory(plan);
  return {std::move(plan), std::move(spline)};
}

void report_warnings(const std::vector<filter::SegmentTrace>& traces) {
  for (const auto& t : traces) {
    for (const auto& w : t.warnings) {
      log(LogLevel::Warn, "{}", w);
    }
  }
}

double empirical_quantile(std::vector<double> v, double q) {
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.9g}", v) : "nan"; }

template <class Fn>
auto timed(double& seconds, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto result = fn();
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw InputError(fmt::format("'{}' is not a directory", dir.string()));
  }
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

void cmd_propagate(const fs::path& plan_file, const CommonOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  auto manifest = start_manifest("propagate", cfg, opts);
  manifest.add_input(plan_file, "plan:" + plan_file.filename().string());

  const auto [plan, spline] = load_plan(plan_file);
  const auto traces = filter::propagate_plan(spline, plan, cfg.filter);
  report_warnings(traces);
  const auto estimates = rta::estimate_rtas(plan, traces, cfg.rta);

  OutputDir out(opts.out_dir);
  out.write_with("trace.csv", [&](std::ostream& os) { filter::write_trace_csv(os, traces); });
  out.write_with("bounds.csv",
                 [&](std::ostream& os) { rta::write_bounds_csv(os, estimates, cfg.rta.confidence); });
  out.finish(std::move(manifest));
  log(LogLevel::Info, "propagate: {} waypoints, {} segments -> {}", plan.size(), traces.size(),
      out.path().string());
}

void cmd_compare(const fs::path& plan_file, const CommonOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  auto manifest = start_manifest("compare", cfg, opts);
  manifest.add_input(plan_file, "plan:" + plan_file.filename().string());
  const auto [plan, spline] = load_plan(plan_file);

  double t_blended = 0, t_gated = 0, t_ulpa = 0, t_mc = 0;
  const auto blended = timed(t_blended, [&] { return filter::propagate_plan(spline, plan, cfg.filter); });
  const auto gated = timed(t_gated, [&] { return baseline::gated_kf(spline, plan, cfg.filter); });
  const auto ulpa = timed(t_ulpa, [&] { return baseline::ulpa_trace(plan, cfg.ulpa, cfg.filter.dt_s); });
  const auto mc = timed(t_mc, [&] { return baseline::monte_carlo_oracle(spline, plan, cfg.filter, cfg.mc); });
  report_warnings(blended);

  const auto est_blended = rta::estimate_rtas(plan, blended, cfg.rta);
  const auto est_gated = rta::estimate_rtas(plan, gated, cfg.rta);
  const auto ulpa_b = baseline::ulpa_bounds(plan, cfg.ulpa);

  OutputDir out(opts.out_dir);
  out.write_with("trace_blended.csv", [&](std::ostream& os) { filter::write_trace_csv(os, blended); });
  out.write_with("trace_gated.csv", [&](std::ostream& os) { filter::write_trace_csv(os, gated); });
  out.write_with("bounds_blended.csv", [&](std::ostream& os) {
    rta::write_bounds_csv(os, est_blended, cfg.rta.confidence);
  });
  out.write_with("bounds_gated.csv", [&](std::ostream& os) {
    rta::write_bounds_csv(os, est_gated, cfg.rta.confidence);
  });
  out.write_with("ulpa_envelope.csv", [&](std::ostream& os) { baseline::write_ulpa_csv(os, ulpa); });
  out.write_with("ulpa_bounds.csv", [&](std::ostream& os) { baseline::write_ulpa_bounds_csv(os, ulpa_b); });
  out.write_with("oracle.csv", [&](std::ostream& os) { baseline::write_oracle_csv(os, mc); });
  baseline::write_arrival_samples(out.path() / "arrivals", mc);

  out.write_with("oracle_check.csv", [&](std::ostream& os) {
    os << "waypoint,rel_frobenius,arrival_samples,arrival_missed\n";
    for (std::size_t k = 1; k < plan.size(); ++k) {
      const auto& a = mc.arrival_times[k];
      const auto missed = static_cast<std::size_t>(
          std::count_if(a.begin(), a.end(), [](double v) { return std::isnan(v); }));
      os << k << ',' << num(baseline::relative_frobenius(mc.waypoint_cov(k), blended[k - 1].waypoint_cov()))
         << ',' << a.size() - missed << ',' << missed << '\n';
    }
  });

  out.write_with("summary.csv", [&](std::ostream& os) {
    os << "method,quantity,max_step_change,max_step_drop,terminal_bound_width_s\n";
    const auto width = [](const std::vector<rta::RtaEstimate>& e) { return e.back().upper - e.back().lower; };
    os << "blended,position_std_m," << num(baseline::max_step_std_change(blended)) << ','
       << num(baseline::max_step_std_drop(blended)) << ',' << num(width(est_blended)) << '\n';
    os << "gated,position_std_m," << num(baseline::max_step_std_change(gated)) << ','
       << num(baseline::max_step_std_drop(gated)) << ',' << num(width(est_gated)) << '\n';
    double u_change = 0, u_drop = 0;
    for (std::size_t i = 1; i < ulpa.size(); ++i) {
      const double d = ulpa[i].half_width - ulpa[i - 1].half_width;
      u_change = std::max(u_change, std::abs(d));
      u_drop = std::max(u_drop, -d);
    }
    os << "ulpa,envelope_half_width_s," << num(u_change) << ',' << num(u_drop) << ','
       << num(ulpa_b.back().upper - ulpa_b.back().lower) << '\n';
    std::vector<double> mc_sd{0.0};
    for (const auto& s : mc.steps) {
      mc_sd.push_back(std::sqrt(std::max(0.0, s.cov.topLeftCorner<3, 3>().trace())));
    }
    double m_change = 0, m_drop = 0;
    for (std::size_t i = 1; i < mc_sd.size(); ++i) {
      const double d = mc_sd[i] - mc_sd[i - 1];
      m_change = std::max(m_change, std::abs(d));
      m_drop = std::max(m_drop, -d);
    }
    std::vector<double> final_arrivals;
    for (double a : mc.arrival_times.back()) {
      if (!std::isnan(a)) {
        final_arrivals.push_back(a);
      }
    }
    const double c = cfg.rta.confidence;
    os << "monte_carlo,position_std_m," << num(m_change) << ',' << num(m_drop) << ','
       << num(empirical_quantile(final_arrivals, 0.5 + 0.5 * c) -
              empirical_quantile(final_arrivals, 0.5 - 0.5 * c))
       << '\n';
  });

  // Wall-clock figures vary run to run; they live outside the manifest's outputs.
  io::write_text_file(out.path() / "timing.csv",
                      fmt::format("method,wall_clock_s\nblended,{:.6f}\ngated,{:.6f}\nulpa,{:.6f}\n"
                                  "monte_carlo,{:.6f}\n",
                                  t_blended, t_gated, t_ulpa, t_mc));
  out.finish(std::move(manifest));
  log(LogLevel::Info, "compare: blended {:.4f} s, gated {:.4f} s, uLPA {:.4f} s, Monte Carlo {:.4f} s",
      t_blended, t_gated, t_ulpa, t_mc);
}

void cmd_tune(const fs::path& adsb_dir, const fs::path& plans_dir, const CommonOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  auto manifest = start_manifest("tune", cfg, opts);

  std::map<std::string, geo::LocalPlan> plans;
  for (const auto& p : list_files(plans_dir, ".json")) {
    manifest.add_input(p, "plans/" + p.filename().string());
    auto local = geo::to_local_frame(geo::load_flight_plan(p));
    const auto id = local.plan_id;
    if (!plans.emplace(id, std::move(local)).second) {
      throw InputError(fmt::format("{}: duplicate plan_id '{}'", p.string(), id));
    }
  }
  std::vector<tuning::FlightPair> pairs;
  for (const auto& f : list_files(adsb_dir, ".csv")) {
    manifest.add_input(f, "adsb/" + f.filename().string());
    auto parsed = tuning::load_adsb(f);
    const auto& rep = parsed.report;
    if (rep.dropped_out_of_range || rep.duplicates_removed || rep.was_unsorted) {
      log(LogLevel::Warn, "{}: dropped {} out-of-range rows, removed {} duplicate timestamps{}",
          f.string(), rep.dropped_out_of_range, rep.duplicates_removed,
          rep.was_unsorted ? ", re-sorted timestamps" : "");
    }
    const auto it = plans.find(parsed.track.flight_id);
    if (it == plans.end()) {
      log(LogLevel::Warn, "{}: no plan with plan_id '{}', skipped", f.string(),
          parsed.track.flight_id);
      continue;
    }
    pairs.push_back({std::move(parsed.track), it->second});
  }
  const auto result = tuning::run_tuning(pairs, cfg.tuning, cfg.filter, cfg.rta);

  OutputDir out(opts.out_dir);
  out.write("tuning_report.json", tuning::tuning_report_json(result));
  out.finish(std::move(manifest));
  log(LogLevel::Info, "tune: {} flights used, accuracy {:.3f} over {} verification flights",
      result.flights_used, result.accuracy, result.verified);
}

void cmd_synth(const fs::path& plan_file, const SynthOptions& synth, const CommonOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  auto manifest = start_manifest("synth", cfg, opts);
  manifest.add_input(plan_file, "plan:" + plan_file.filename().string());
  manifest.config.emplace_back("synth_flights", std::to_string(synth.flights));
  manifest.config.emplace_back("synth_samples", std::to_string(synth.samples));
  manifest.config.emplace_back("synth_noise_sd_m", fmt::format("{:.17g}", synth.noise_sd_m));
  manifest.config.emplace_back("synth_arrival_sigma_s", fmt::format("{:.17g}", synth.arrival_sigma_s));

  const auto geo_plan = geo::load_flight_plan(plan_file);
  const auto [plan, spline] = load_plan(plan_file);
  tuning::SynthConfig sc;
  sc.noise_cov = Eigen::Matrix3d::Identity() * synth.noise_sd_m * synth.noise_sd_m;
  sc.arrival_sigma_s = synth.arrival_sigma_s;
  sc.samples = synth.samples;
  sc.seed = cfg.mc.seed;

  OutputDir out(opts.out_dir);
  for (std::size_t i = 0; i < synth.flights; ++i) {
    const auto id = fmt::format("{}-{:04d}", plan.plan_id, i);
    const auto flight = tuning::synthesize_flight(plan, spline, sc, i, id);
    out.write("adsb/" + id + ".csv", tuning::serialize_adsb(flight.track));
    auto copy = geo_plan;
    copy.plan_id = id;
    out.write("plans/" + id + ".json", geo::serialize_flight_plan(copy));
  }
  out.finish(std::move(manifest));
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Kalman-filter uncertainty propagation along 4D flight plans", "rtaprop"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions opts;
  std::uint64_t seed = 0;
  fs::path plan_file, adsb_dir, plans_dir;
  SynthOptions synth;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Flat key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Random seed (overrides the config file)");
    sub->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::Range(1, 1024));
  };

  auto* propagate = app.add_subcommand("propagate", "Propagate uncertainty along a flight plan");
  propagate->add_option("plan", plan_file, "Flight-plan JSON file")->required()->check(CLI::ExistingFile);
  add_common(propagate);

  auto* compare = app.add_subcommand("compare", "Blended vs gated vs uLPA vs Monte Carlo");
  compare->add_option("plan", plan_file, "Flight-plan JSON file")->required()->check(CLI::ExistingFile);
  add_common(compare);

  auto* tune = app.add_subcommand("tune", "Estimate Q_max from ADS-B tracks and score arrival accuracy");
  tune->add_option("adsb_dir", adsb_dir, "Directory of ADS-B CSV files")->required();
  tune->add_option("plans_dir", plans_dir, "Directory of flight-plan JSON files")->required();
  add_common(tune);

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic ADS-B corpus flown along a plan");
  synth_cmd->add_option("plan", plan_file, "Flight-plan JSON file")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--flights", synth.flights, "Number of flights");
  synth_cmd->add_option("--samples", synth.samples, "Samples per flight");
  synth_cmd->add_option("--noise-sd", synth.noise_sd_m, "Per-axis position noise, meters");
  synth_cmd->add_option("--arrival-sigma", synth.arrival_sigma_s, "Arrival-time jitter, seconds");
  add_common(synth_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kInputError;
  }

  for (auto* sub : {propagate, compare, tune, synth_cmd}) {
    if (sub->parsed() && sub->count("--seed") > 0) {
      opts.seed = seed;
    }
  }

  try {
    if (propagate->parsed()) {
      cmd_propagate(plan_file, opts);
    } else if (compare->parsed()) {
      cmd_compare(plan_file, opts);
    } else if (tune->parsed()) {
      cmd_tune(adsb_dir, plans_dir, opts);
    } else if (synth_cmd->parsed()) {
      cmd_synth(plan_file, synth, opts);
    }
  } catch (const InputError& e) {
    log(LogLevel::Error, "input error: {}", e.what());
    return kInputError;
  } catch (const DomainError& e) {
    log(LogLevel::Error, "input error: {}", e.what());
    return kInputError;
  } catch (const NumericalError& e) {
    log(LogLevel::Error, "numerical error: {}", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    log(LogLevel::Error, "unexpected error: {}", e.what());
    return kUnexpected;
  }
  return kSuccess;
}

} // namespace rtaprop::cli
