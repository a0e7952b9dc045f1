#include "rtaprop/baseline.hpp"

#include "rtaprop/error.hpp"
#include "rtaprop/parallel.hpp"
#include "rtaprop/random.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace rtaprop::baseline {

using filter::Matrix63d;
using filter::Matrix6d;
using filter::Vector6d;

void UlpaConfig::validate() const {
  if (!(activation_fraction > 0.0 && activation_fraction < 1.0)) {
    throw InputError(
        fmt::format("uLPA activation fraction must lie in (0, 1), got {}", activation_fraction));
  }
  if (!(rta_tolerance_s >= 0.0)) {
    throw InputError(fmt::format("uLPA tolerance must be >= 0, got {}", rta_tolerance_s));
  }
  if (!(growth_rate >= 0.0) || !std::isfinite(growth_rate)) {
    throw InputError(fmt::format("uLPA growth rate must be >= 0, got {}", growth_rate));
  }
}

std::vector<UlpaBound> ulpa_bounds(const geo::LocalPlan& plan, const UlpaConfig& cfg) {
  cfg.validate();
  std::vector<UlpaBound> out;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const double nominal = plan.origin.rta_s + plan.points[k].t;
    const double half = k == 0 ? 0.0 : cfg.rta_tolerance_s;
    out.push_back({k, nominal, nominal - half, nominal + half});
  }
  return out;
}

double ulpa_half_width(const geo::LocalPlan& plan, const UlpaConfig& cfg, double t) {
  const auto& pts = plan.points;
  if (!(t >= pts.front().t && t <= pts.back().t)) {
    throw DomainError(fmt::format("t = {} outside plan horizon", t));
  }
  std::size_t seg = 0;
  while (seg + 2 < pts.size() && t >= pts[seg + 1].t) {
    ++seg;
  }
  const double start = pts[seg].t;
  const double duration = pts[seg + 1].t - start;
  const double w0 = seg == 0 ? 0.0 : cfg.rta_tolerance_s;
  const double t_act = cfg.activation_fraction * duration;
  const double peak = w0 + cfg.growth_rate * t_act;
  const double tau = t - start;
  if (tau <= t_act) {
    return w0 + cfg.growth_rate * tau;
  }
  const double frac = (tau - t_act) / (duration - t_act);
  return peak + (cfg.rta_tolerance_s - peak) * frac;
}

std::vector<UlpaSample> ulpa_trace(const geo::LocalPlan& plan, const UlpaConfig& cfg,
                                   double dt) {
  cfg.validate();
  if (!(dt > 0.0)) {
    throw InputError("uLPA trace stride must be positive");
  }
  std::vector<UlpaSample> out;
  out.push_back({0, plan.points.front().t, 0.0});
  for (std::size_t seg = 0; seg + 1 < plan.size(); ++seg) {
    const double start = plan.points[seg].t;
    const double end = plan.points[seg + 1].t;
    const auto n = static_cast<std::size_t>(std::ceil((end - start) / dt - 1e-9));
    for (std::size_t i = 1; i <= n; ++i) {
      const double t = std::min(start + static_cast<double>(i) * dt, end);
      // The endpoint belongs to this segment's terminal tolerance.
      const double w = t >= end ? cfg.rta_tolerance_s : ulpa_half_width(plan, cfg, t);
      out.push_back({seg, t, w});
    }
  }
  return out;
}

filter::NoiseSchedule gated_schedule(const filter::FilterConfig& cfg, double activation) {
  const Eigen::Matrix3d q_min = cfg.q_min;
  return [q_min, activation](double p) -> std::optional<filter::ScheduleEntry> {
    if (p < activation) {
      return std::nullopt;
    }
    return filter::ScheduleEntry{q_min, 0.0};
  };
}

std::vector<filter::SegmentTrace> gated_kf(const spline::TrajectorySpline& spline,
                                           const geo::LocalPlan& plan,
                                           const filter::FilterConfig& cfg) {
  return filter::propagate_plan(spline, plan, cfg, gated_schedule(cfg));
}

void McConfig::validate() const {
  if (samples < 1) {
    throw InputError("Monte Carlo needs at least one sample");
  }
  if (dt_s < 0.0) {
    throw InputError("Monte Carlo stride must be >= 0");
  }
}

const Matrix6d& MonteCarloResult::waypoint_cov(std::size_t k) const {
  if (k < 1 || k > waypoint_step_index.size()) {
    throw InputError(fmt::format("waypoint {} has no oracle covariance", k));
  }
  return steps[waypoint_step_index[k - 1]].cov;
}

namespace {

struct SimStep {
  double dt;
  double t;
  Vector6d drive;  ///< B u
  bool updated;
  Matrix63d gain;
  Eigen::Vector3d z;
  Eigen::Matrix3d q_sqrt;
};

Eigen::Matrix3d psd_sqrt(const Eigen::Matrix3d& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  const Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

Matrix6d psd_sqrt(const Matrix6d& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix6d> es(m);
  const Vector6d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

// Per-step moment accumulator of deviations from the reference mean.
struct Moments {
  std::array<CompensatedSum, 6> first;
  std::array<CompensatedSum, 21> second;

  void add(const Vector6d& d) {
    for (int i = 0, idx = 0; i < 6; ++i) {
      first[static_cast<std::size_t>(i)].add(d[i]);
      for (int j = i; j < 6; ++j) {
        second[static_cast<std::size_t>(idx++)].add(d[i] * d[j]);
      }
    }
  }
  void add(const Moments& o) {
    for (std::size_t i = 0; i < first.size(); ++i) {
      first[i].add(o.first[i]);
    }
    for (std::size_t i = 0; i < second.size(); ++i) {
      second[i].add(o.second[i]);
    }
  }
};

// Fixed partition so the reduction order never depends on the worker count.
constexpr std::size_t kChunks = 8;

} // namespace

MonteCarloResult monte_carlo_oracle(const spline::TrajectorySpline& spline,
                                    const geo::LocalPlan& plan,
                                    const filter::FilterConfig& cfg_in, const McConfig& mc,
                                    const filter::NoiseSchedule& schedule) {
  mc.validate();
  filter::FilterConfig cfg = cfg_in;
  if (mc.dt_s > 0.0) {
    cfg.dt_s = mc.dt_s;
  }

  MonteCarloResult result;
  result.samples = mc.samples;
  result.reference = filter::propagate_plan(spline, plan, cfg, schedule);

  // Flatten the gain schedule, then extend past the final waypoint so late
  // samples can still cross its plane.
  std::vector<SimStep> sim;
  std::vector<std::pair<std::size_t, std::size_t>> labels;
  std::vector<Vector6d> ref_mean;
  for (const auto& tr : result.reference) {
    for (const auto& s : tr.steps) {
      sim.push_back({s.dt, s.t, filter::control_matrix(s.dt) * s.u, s.updated, s.gain, s.z,
                     psd_sqrt(s.q)});
      labels.emplace_back(tr.segment, s.step);
      ref_mean.push_back(s.mean);
    }
    result.waypoint_step_index.push_back(sim.size() - 1);
  }
  const std::size_t plan_steps = sim.size();
  {
    const double t_end = spline.end_time();
    const Eigen::Vector3d p_end = spline.knot_positions().back();
    const Eigen::Vector3d v_end = spline.velocity_at(t_end);
    const double last_duration = plan.points.back().t - plan.points[plan.size() - 2].t;
    const auto extra = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::ceil(0.5 * last_duration / cfg.dt_s)));
    filter::FilterState st = result.reference.back().exit();
    for (std::size_t i = 0; i < extra; ++i) {
      st = filter::predict(st, v_end, cfg.dt_s, cfg.sigma_a2);
      SimStep s{cfg.dt_s, st.t, filter::control_matrix(cfg.dt_s) * v_end, false,
                Matrix63d::Zero(), p_end + v_end * (st.t - t_end), Eigen::Matrix3d::Zero()};
      if (const auto q = schedule(1.0)) {
        auto upd = filter::update_with_gain(st, s.z, q->q);
        st = upd.state;
        s.updated = true;
        s.gain = upd.gain;
        s.q_sqrt = psd_sqrt(q->q);
      }
      sim.push_back(s);
    }
  }

  // Crossing planes: the final waypoint's plane is normal to its incoming
  // chord; interior planes bisect the turn (normal = sum of the unit chords),
  // since after a turn the incoming-normal plane is flown alongside, not through.
  const std::size_t n_wp = plan.size();
  std::vector<Eigen::Vector3d> normals(n_wp, Eigen::Vector3d::Zero());
  for (std::size_t k = 1; k < n_wp; ++k) {
    const Eigen::Vector3d in =
        (plan.points[k].position - plan.points[k - 1].position).normalized();
    normals[k] = in;
    if (k + 1 < n_wp) {
      const Eigen::Vector3d bisector =
          in + (plan.points[k + 1].position - plan.points[k].position).normalized();
      if (bisector.norm() > 1e-6) {
        normals[k] = bisector.normalized();
      }
    }
  }
  // Waypoint k is searched for between the nominal passages of k-1 and k+1.
  std::vector<std::pair<double, double>> windows(n_wp);
  for (std::size_t k = 1; k < n_wp; ++k) {
    windows[k] = {plan.points[k - 1].t,
                  k + 1 < n_wp ? plan.points[k + 1].t : std::numeric_limits<double>::infinity()};
  }

  const filter::FilterState entry = result.reference.front().entry;
  const Matrix6d entry_sqrt = psd_sqrt(entry.cov);
  const double accel_sd = std::sqrt(cfg.sigma_a2);

  result.arrival_times.assign(n_wp, std::vector<double>(mc.samples,
                                                        std::numeric_limits<double>::quiet_NaN()));
  for (auto& a : result.arrival_times[0]) {
    a = plan.points.front().t;
  }

  std::vector<std::vector<Moments>> chunk_moments(kChunks, std::vector<Moments>(plan_steps));
  parallel_for(kChunks, mc.jobs, [&](std::size_t chunk) {
    const std::size_t begin = mc.samples * chunk / kChunks;
    const std::size_t end = mc.samples * (chunk + 1) / kChunks;
    auto& moments = chunk_moments[chunk];
    for (std::size_t i = begin; i < end; ++i) {
      Philox rng(mc.seed, i);
      Vector6d n0;
      for (int j = 0; j < 6; ++j) {
        n0[j] = rng.normal();
      }
      Vector6d x = entry.mean + entry_sqrt * n0;
      double t_prev = entry.t;
      std::size_t first_open = 1;
      for (std::size_t s = 0; s < sim.size(); ++s) {
        const auto& st = sim[s];
        const Vector6d prev = x;
        x.head<3>() += st.dt * x.tail<3>();
        x += st.drive;
        for (int a = 0; a < 3; ++a) {
          const double acc = accel_sd * rng.normal();
          x[a] += 0.5 * st.dt * st.dt * acc;
          x[a + 3] += st.dt * acc;
        }
        if (st.updated) {
          Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
          const Eigen::Vector3d innovation = st.z + st.q_sqrt * v - x.head<3>();
          x += st.gain * innovation;
        }
        if (s < plan_steps) {
          moments[s].add(x - ref_mean[s]);
        }
        // Plane crossings for waypoints whose search window covers this step.
        for (std::size_t k = first_open; k < n_wp; ++k) {
          if (windows[k].first > st.t) {
            break;
          }
          if (t_prev > windows[k].second) {
            if (k == first_open) {
              ++first_open;
            }
            continue;
          }
          auto& slot = result.arrival_times[k][i];
          if (!std::isnan(slot)) {
            continue;
          }
          const double s_prev = (prev.head<3>() - plan.points[k].position).dot(normals[k]);
          const double s_now = (x.head<3>() - plan.points[k].position).dot(normals[k]);
          if (s_now >= 0.0) {
            slot = s_prev < 0.0 ? t_prev + st.dt * (-s_prev) / (s_now - s_prev) : t_prev;
          }
        }
        t_prev = st.t;
      }
    }
  });

  result.steps.reserve(plan_steps);
  const auto n = static_cast<double>(mc.samples);
  for (std::size_t s = 0; s < plan_steps; ++s) {
    Moments total;
    for (std::size_t c = 0; c < kChunks; ++c) {
      total.add(chunk_moments[c][s]);
    }
    Vector6d m;
    Matrix6d second;
    for (int i = 0, idx = 0; i < 6; ++i) {
      m[i] = total.first[static_cast<std::size_t>(i)].value() / n;
      for (int j = i; j < 6; ++j) {
        second(i, j) = second(j, i) = total.second[static_cast<std::size_t>(idx++)].value();
      }
    }
    Matrix6d cov = Matrix6d::Zero();
    if (mc.samples > 1) {
      cov = (second - n * m * m.transpose()) / (n - 1.0);
    }
    result.steps.push_back({labels[s].first, labels[s].second, sim[s].t, ref_mean[s] + m, cov});
  }
  return result;
}

double relative_frobenius(const Matrix6d& a, const Matrix6d& b) {
  const double denom = b.norm();
  if (!(denom > 0.0)) {
    return (a - b).norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (a - b).norm() / denom;
}

std::vector<double> position_std_series(const std::vector<filter::SegmentTrace>& traces) {
  std::vector<double> out;
  if (traces.empty()) {
    return out;
  }
  out.push_back(std::sqrt(traces.front().entry.cov.topLeftCorner<3, 3>().trace()));
  for (const auto& tr : traces) {
    for (const auto& s : tr.steps) {
      out.push_back(std::sqrt(std::max(0.0, s.cov.topLeftCorner<3, 3>().trace())));
    }
  }
  return out;
}

double max_step_std_drop(const std::vector<filter::SegmentTrace>& traces) {
  const auto sd = position_std_series(traces);
  double drop = 0.0;
  for (std::size_t i = 1; i < sd.size(); ++i) {
    drop = std::max(drop, sd[i - 1] - sd[i]);
  }
  return drop;
}

double max_step_std_change(const std::vector<filter::SegmentTrace>& traces) {
  const auto sd = position_std_series(traces);
  double change = 0.0;
  for (std::size_t i = 1; i < sd.size(); ++i) {
    change = std::max(change, std::abs(sd[i] - sd[i - 1]));
  }
  return change;
}

void write_ulpa_csv(std::ostream& out, const std::vector<UlpaSample>& trace) {
  out << "segment,t,half_width\n";
  for (const auto& s : trace) {
    out << fmt::format("{},{:.9g},{:.9g}\n", s.segment, s.t, s.half_width);
  }
}

void write_ulpa_bounds_csv(std::ostream& out, const std::vector<UlpaBound>& bounds) {
  out << "waypoint,nominal_rta,lower,upper\n";
  for (const auto& b : bounds) {
    out << fmt::format("{},{:.12g},{:.12g},{:.12g}\n", b.waypoint_index, b.nominal_rta, b.lower,
                       b.upper);
  }
}

void write_oracle_csv(std::ostream& out, const MonteCarloResult& mc) {
  out << "segment,step,t,x,y,z,vx,vy,vz,var_x,var_y,var_z,var_vx,var_vy,var_vz,trace\n";
  for (const auto& s : mc.steps) {
    out << fmt::format("{},{},{:.9g}", s.segment, s.step, s.t);
    for (int i = 0; i < 6; ++i) {
      out << fmt::format(",{:.9g}", s.mean[i]);
    }
    for (int i = 0; i < 6; ++i) {
      out << fmt::format(",{:.9g}", s.cov(i, i));
    }
    out << fmt::format(",{:.9g}\n", s.cov.trace());
  }
}

void write_arrival_samples(const std::filesystem::path& dir, const MonteCarloResult& mc) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 1; k < mc.arrival_times.size(); ++k) {
    std::ofstream f(dir / fmt::format("arrivals_wp{}.csv", k));
    if (!f) {
      throw InputError(fmt::format("cannot write arrival samples to '{}'", dir.string()));
    }
    f << "sample,arrival_t\n";
    for (std::size_t i = 0; i < mc.arrival_times[k].size(); ++i) {
      const double a = mc.arrival_times[k][i];
      f << i << ',' << (std::isnan(a) ? std::string("nan") : fmt::format("{:.9g}", a)) << '\n';
    }
  }
}

} // namespace rtaprop::baseline
