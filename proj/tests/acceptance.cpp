// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include "support.hpp"

#include "rtaprop/baseline.hpp"
#include "rtaprop/cli/commands.hpp"
#include "rtaprop/filter.hpp"
#include "rtaprop/io.hpp"
#include "rtaprop/random.hpp"
#include "rtaprop/rta.hpp"
#include "rtaprop/spline.hpp"
#include "rtaprop/tuning.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rtaprop;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [violated]");
  }
};

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Fixture {
  std::string name;
  geo::LocalPlan plan;
  spline::TrajectorySpline spline;
};

Fixture make_fixture(const std::string& name, const std::vector<test::Wp>& wps) {
  auto plan = test::local_plan(wps, name);
  auto s = spline::fit_trajectory(plan);
  return {name, std::move(plan), std::move(s)};
}

std::vector<Fixture> fixtures() {
  return {make_fixture("straight", test::straight_wps()),
          make_fixture("l_shaped", test::l_shaped_wps()),
          make_fixture("six_wp", test::six_wp_wps())};
}

// 1 ------------------------------------------------------------------------
Outcome smoothness() {
  Outcome o;
  const auto f = make_fixture("straight", test::straight_wps());
  filter::FilterConfig cfg;
  cfg.sigma_a2 = 1.0;
  const Stopwatch sw;
  const auto blended = filter::propagate_plan(f.spline, f.plan, cfg);
  const auto gated = baseline::gated_kf(f.spline, f.plan, cfg);
  const double elapsed = sw.seconds();

  const double gated_drop = baseline::max_step_std_drop(gated);
  const double blended_drop = baseline::max_step_std_drop(blended);
  const double blended_change = baseline::max_step_std_change(blended);
  const auto series = baseline::position_std_series(blended);
  const double peak = *std::max_element(series.begin(), series.end());

  o.require(gated_drop >= 3.0 * blended_drop,
            fmt::format("gated max drop {:.3f} m vs blended {:.3f} m ({:.1f}x, need >= 3x)",
                        gated_drop, blended_drop, gated_drop / blended_drop));
  o.require(blended_change < 0.25 * peak,
            fmt::format("blended max step change {:.3f} m < 25% of peak {:.3f} m", blended_change,
                        peak));
  o.require(elapsed < 1.0, fmt::format("runtime {:.4f} s < 1 s", elapsed));
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome oracle_equivalence() {
  Outcome o;
  const Stopwatch sw;
  baseline::McConfig mc;
  mc.samples = 10000;
  double worst = 0.0;
  for (const auto& f : fixtures()) {
    const auto r = baseline::monte_carlo_oracle(f.spline, f.plan, filter::FilterConfig{}, mc);
    std::string per;
    for (std::size_t k = 1; k < f.plan.size(); ++k) {
      const double e =
          baseline::relative_frobenius(r.waypoint_cov(k), r.reference[k - 1].waypoint_cov());
      worst = std::max(worst, e);
      per += fmt::format("{}{:.4f}", per.empty() ? "" : "/", e);
      o.pass = o.pass && e <= 0.05;
    }
    o.detail += fmt::format("{}{}: {}", o.detail.empty() ? "" : "; ", f.name, per);
  }
  const double elapsed = sw.seconds();
  o.require(worst <= 0.05, fmt::format("worst relative Frobenius {:.4f} <= 0.05", worst));
  o.require(elapsed < 30.0, fmt::format("runtime {:.2f} s < 30 s", elapsed));
  return o;
}

// 3 ------------------------------------------------------------------------
Outcome default_constants() {
  Outcome o;
  const filter::FilterConfig cfg;
  o.require(cfg.q_max == Eigen::Matrix3d::Identity() * 1e8, "Q_max = 1e8 I");
  o.require(cfg.q_min == Eigen::Matrix3d::Identity(), "Q_min = I");
  bool half = true;
  for (double p : {0.0, 0.25, 0.5, 2.0 / 3.0, 0.9}) {
    for (double k : {1.0, 10.0, 50.0}) {
      half = half && filter::sigmoid_blend(p, k, p) == 0.5;
    }
  }
  o.require(half, "sigmoid(p = LPA) = 0.5");
  const baseline::UlpaConfig ulpa;
  o.require(ulpa.activation_fraction == 2.0 / 3.0, "uLPA activation 2/3");
  bool terminal = ulpa.rta_tolerance_s == 10.0;
  for (const auto& f : fixtures()) {
    const auto b = baseline::ulpa_bounds(f.plan, ulpa);
    for (std::size_t k = 1; k < b.size(); ++k) {
      terminal = terminal && b[k].upper - b[k].nominal_rta == 10.0 &&
                 b[k].nominal_rta - b[k].lower == 10.0;
    }
  }
  o.require(terminal, "uLPA terminal envelope +/-10 s");
  bool blocks = true;
  for (double dt : {0.5, 1.0, 2.0}) {
    const auto r = filter::process_noise(dt, 1.0);
    for (int a = 0; a < 3; ++a) {
      blocks = blocks && r(a, a) == dt * dt * dt * dt / 4 && r(a, a + 3) == dt * dt * dt / 2 &&
               r(a + 3, a) == dt * dt * dt / 2 && r(a + 3, a + 3) == dt * dt;
    }
  }
  o.require(blocks, "process-noise blocks (dt^4/4, dt^3/2, dt^2)");
  return o;
}

// 4 ------------------------------------------------------------------------
Outcome rta_pipeline() {
  Outcome o;
  auto all = fixtures();
  bool monotone = true;
  double worst_collapse = 0.0;
  for (const auto& f : all) {
    const auto est = rta::estimate_rtas(
        f.plan, filter::propagate_plan(f.spline, f.plan, filter::FilterConfig{}), rta::RtaConfig{});
    for (std::size_t k = 1; k < est.size(); ++k) {
      monotone = monotone && est[k].time_variance >= est[k - 1].time_variance;
    }
    filter::FilterConfig quiet;
    quiet.sigma_a2 = 0.0;
    for (const auto& e : rta::estimate_rtas(f.plan, filter::propagate_plan(f.spline, f.plan, quiet),
                                            rta::RtaConfig{})) {
      worst_collapse = std::max({worst_collapse, std::abs(e.upper - e.nominal_rta),
                                 std::abs(e.lower - e.nominal_rta)});
    }
  }
  o.require(monotone, "cumulative variance non-decreasing on all fixtures");
  o.require(worst_collapse <= 1e-6,
            fmt::format("zero-noise bound offset {:.3g} s <= 1e-6 s", worst_collapse));

  // |(3, 4, 0)| / |(10, 0, 0)| = 0.5 exactly.
  const rta::SegmentKinematics kin{{600, 0, 0}, 60.0, {10, 0, 0}};
  const Eigen::Vector3d s2v(3, 4, 0);
  const double at = rta::segment_time_variance(kin, s2v, 1.0, 0.5);
  const double above = rta::segment_time_variance(kin, s2v, 1.0, std::nextafter(0.5, 1.0));
  o.require(at == 0.0 && above == 30.0,
            fmt::format("strict threshold: ratio == delta*v0 -> {}, just below -> {}", at, above));
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome spline_quality() {
  Outcome o;
  std::vector<std::vector<test::Wp>> plans{test::straight_wps(), test::l_shaped_wps(),
                                           test::six_wp_wps()};
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    plans.push_back(test::random_monotone_x(rng, 3 + i % 8));
  }
  double interp = 0.0, c1 = 0.0, overshoot = 0.0, dv = 0.0, da = 0.0;
  for (const auto& wps : plans) {
    const auto s = spline::fit_trajectory(test::local_plan(wps));
    for (const auto& w : wps) {
      interp = std::max(interp, (s.position_at(w.t) - Eigen::Vector3d(w.x, w.y, w.z)).norm());
    }
    for (std::size_t k = 0; k + 1 < wps.size(); ++k) {
      const double t0 = wps[k].t, t1 = wps[k + 1].t;
      if (k > 0) {
        // One-sided limits straddling the knot; acceleration is bounded so the
        // jump must vanish with the offset.
        const double e = 1e-7;
        c1 = std::max(c1, (s.velocity_at(t0 - e) - s.velocity_at(t0 + e)).norm());
      }
      const Eigen::Vector3d p0(wps[k].x, wps[k].y, wps[k].z), p1(wps[k + 1].x, wps[k + 1].y,
                                                               wps[k + 1].z);
      constexpr int kSamples = 10000;
      for (int i = 0; i <= kSamples; ++i) {
        const double t = t0 + (t1 - t0) * i / kSamples;
        const Eigen::Vector3d p = s.position_at(t);
        for (int a = 0; a < 3; ++a) {
          const double lo = std::min(p0[a], p1[a]), hi = std::max(p0[a], p1[a]);
          overshoot = std::max({overshoot, lo - p[a], p[a] - hi});
        }
      }
      const double h = 1e-3;
      for (int i = 1; i < 20; ++i) {
        const double t = t0 + (t1 - t0) * i / 20.0;
        const Eigen::Vector3d fd_v = (s.position_at(t + h) - s.position_at(t - h)) / (2 * h);
        const Eigen::Vector3d fd_a = (s.velocity_at(t + h) - s.velocity_at(t - h)) / (2 * h);
        dv = std::max(dv, (fd_v - s.velocity_at(t)).cwiseAbs().maxCoeff());
        da = std::max(da, (fd_a - s.acceleration_at(t)).cwiseAbs().maxCoeff());
      }
    }
  }
  o.require(interp <= 1e-9, fmt::format("knot interpolation error {:.2e} m <= 1e-9 m", interp));
  o.require(c1 <= 1e-5, fmt::format("velocity jump across knots {:.2e} m/s (C1)", c1));
  // Round-off at kilometre coordinates is ~1e-13 m; use the interpolation slack.
  o.require(overshoot <= 1e-9,
            fmt::format("max excursion outside segment endpoints {:.2e} m <= 1e-9 m at 1e4 "
                        "samples/segment",
                        std::max(overshoot, 0.0)));
  o.require(dv <= 1e-5, fmt::format("velocity vs finite difference {:.2e} m/s <= 1e-5", dv));
  o.require(da <= 1e-4, fmt::format("acceleration vs finite difference {:.2e} m/s^2 <= 1e-4", da));
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome tuning_self_consistency() {
  Outcome o;
  const Stopwatch sw;
  // 5 m/s, two 120 s legs; small acceleration noise keeps the arrival jitter
  // (a uniform clock stretch) from leaking much into the position deviations.
  const auto plan =
      test::local_plan({{0, 0, 0, 0}, {600, 150, 0, 120}, {1200, 0, 0, 240}}, "tuning");
  const auto s = spline::fit_trajectory(plan);
  filter::FilterConfig truth;
  truth.sigma_a2 = 0.01;
  truth.set_q_max_scale(100.0);
  const rta::RtaConfig rcfg;
  const auto predicted =
      rta::estimate_rtas(plan, filter::propagate_plan(s, plan, truth), rcfg).back();

  // Generative model: 10 m/axis position noise (covariance 100 I) and a final
  // arrival drawn from the model's own predicted RTA distribution.
  tuning::SynthConfig synth;
  synth.noise_cov = Eigen::Matrix3d::Identity() * 100.0;
  synth.arrival_sigma_s = std::sqrt(predicted.time_variance);
  synth.samples = 1000;
  constexpr std::size_t kTrain = 20, kVerify = 200;
  std::vector<tuning::FlightPair> pairs;
  for (std::size_t i = 0; i < kTrain + kVerify; ++i) {
    auto f = tuning::synthesize_flight(plan, s, synth, i, fmt::format("SYN{:03d}", i));
    auto p = plan;
    p.plan_id = f.track.flight_id;
    pairs.push_back({std::move(f.track), std::move(p)});
  }
  tuning::TuningConfig tcfg;
  tcfg.train_fraction = static_cast<double>(kTrain) / static_cast<double>(kTrain + kVerify);
  const auto r = tuning::run_tuning(pairs, tcfg, truth, rcfg);
  const double elapsed = sw.seconds();

  const Eigen::Vector3d d = r.q_max_estimate.diagonal();
  const double worst = ((d.array() - 100.0).abs() / 100.0).maxCoeff();
  o.require(r.flights_used == kTrain, fmt::format("{} training flights averaged", r.flights_used));
  o.require(worst <= 0.20, fmt::format("recovered diag ({:.1f}, {:.1f}, {:.1f}) within {:.1f}% "
                                       "of 100 (<= 20%)",
                                       d.x(), d.y(), d.z(), 100.0 * worst));
  o.require(r.verified == kVerify, fmt::format("{} verification flights scored", r.verified));
  o.require(r.accuracy >= 0.90 && r.accuracy <= 0.99,
            fmt::format("coverage {:.3f} at 95% confidence in [0.90, 0.99] (predicted sd {:.2f} s)",
                        r.accuracy, std::sqrt(predicted.time_variance)));
  o.require(elapsed < 60.0, fmt::format("runtime {:.2f} s < 60 s", elapsed));
  return o;
}

// 7 ------------------------------------------------------------------------
int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rtaprop");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (e.is_regular_file() && rel != "timing.csv") {
      out[rel] = io::read_text_file(e.path());
    }
  }
  return out;
}

Outcome determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "rtaprop_acceptance";
  fs::remove_all(root);
  const auto plan = test::fixture("plans/six_wp.json").string();
  const auto quick = test::fixture("configs/quick_mc.conf").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"propagate", {"propagate", plan}},
      {"compare", {"compare", plan, "--config", quick}},
      {"synth", {"synth", plan, "--flights", "8", "--samples", "300", "--arrival-sigma", "2"}},
  };
  for (const auto& [name, args] : commands) {
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* jobs : {"1", "1", "3"}) {
      const auto out = root / fmt::format("{}_{}", name, runs.size());
      auto full = args;
      full.insert(full.end(), {"--out", out.string(), "--jobs", jobs});
      if (run_cli(full) != 0) {
        o.require(false, name + " exited nonzero");
        return o;
      }
      runs.push_back(snapshot(out));
    }
    o.require(runs[0] == runs[1] && runs[0] == runs[2],
              fmt::format("{}: {} files byte-identical over 3 runs", name, runs[0].size()));
  }
  std::vector<std::map<std::string, std::string>> tunes;
  for (int i = 0; i < 2; ++i) {
    const auto out = root / fmt::format("tune_{}", i);
    if (run_cli({"tune", (root / "synth_0" / "adsb").string(), (root / "synth_0" / "plans").string(),
                 "--out", out.string()}) != 0) {
      o.require(false, "tune exited nonzero");
      return o;
    }
    tunes.push_back(snapshot(out));
  }
  o.require(tunes[0] == tunes[1], "tune: byte-identical over 2 runs");
  fs::remove_all(root);
  return o;
}

// 8 ------------------------------------------------------------------------
Outcome performance() {
  Outcome o;
  // 100 waypoints over two hours.
  Philox rng(8, 0);
  std::vector<test::Wp> wps{{0, 0, 0, 0}};
  for (int i = 1; i < 100; ++i) {
    const auto& p = wps.back();
    wps.push_back({p.x + 400.0 + 400.0 * rng.uniform(), p.y + 300.0 * (rng.uniform() - 0.5),
                   p.z + 40.0 * (rng.uniform() - 0.5), 7200.0 * i / 99.0});
  }
  const auto plan = test::local_plan(wps, "perf");
  const filter::FilterConfig cfg;
  const Stopwatch sw;
  const auto s = spline::fit_trajectory(plan);
  const auto traces = filter::propagate_plan(s, plan, cfg);
  const double filter_s = sw.seconds();
  std::size_t steps = 0;
  for (const auto& tr : traces) {
    steps += tr.steps.size();
  }
  o.require(filter_s < 1.0,
            fmt::format("blended filter {} steps in {:.4f} s (< 1 s)", steps, filter_s));

  const Stopwatch mc_sw;
  baseline::McConfig mc;
  mc.samples = 10000;
  const auto r = baseline::monte_carlo_oracle(s, plan, cfg, mc);
  const double mc_s = mc_sw.seconds();
  o.detail += fmt::format("; Monte Carlo 1e4 samples {:.2f} s = {:.0f}x slower (reported only)",
                          mc_s, mc_s / filter_s);
  (void)r;
  return o;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 smoothness contrast", smoothness},
      {"2 Monte Carlo oracle equivalence", oracle_equivalence},
      {"3 default constants", default_constants},
      {"4 RTA pipeline", rta_pipeline},
      {"5 spline quality", spline_quality},
      {"6 tuning self-consistency", tuning_self_consistency},
      {"7 CLI determinism", determinism},
      {"8 performance", performance},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("threw: {}", e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
