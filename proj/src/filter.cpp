#include "rtaprop/filter.hpp"

#include "rtaprop/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <array>
#include <cmath>
#include <limits>
#include <ostream>

namespace rtaprop::filter {

namespace {

constexpr double kTimeEps = 1e-9;

std::string fmt_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  return fmt::format("{:.9g}", v);
}

// Arc length of the spline over [a, b] by 5-point Gauss-Legendre quadrature.
double arc_length(const spline::TrajectorySpline& s, double a, double b) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                           -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665,
                                           0.4786286704993665, 0.2369268850561891,
                                           0.2369268850561891};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += w[i] * s.velocity_at(mid + half * x[i]).norm();
  }
  return sum * half;
}

} // namespace

void FilterConfig::validate() const {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) {
    throw InputError(fmt::format("dt_s must be positive, got {}", dt_s));
  }
  if (!(sigma_a2 >= 0.0) || !std::isfinite(sigma_a2)) {
    throw InputError(fmt::format("sigma_a2 must be non-negative, got {}", sigma_a2));
  }
  if (!(lpa >= 0.0 && lpa < 1.0)) {
    throw InputError(fmt::format("lpa must lie in [0, 1), got {}", lpa));
  }
  if (!std::isfinite(k_gain)) {
    throw InputError("k_gain must be finite");
  }
  if (!q_min.isApprox(q_min.transpose()) || !q_max.isApprox(q_max.transpose())) {
    throw InputError("Q_min and Q_max must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> emin(q_min);
  if (!(emin.eigenvalues().minCoeff() > 0.0)) {
    throw InputError("Q_min must be positive definite");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ediff(q_max - q_min);
  if (ediff.eigenvalues().minCoeff() < -1e-12 * q_max.trace()) {
    throw InputError("Q_max must dominate Q_min (Q_max - Q_min positive semidefinite)");
  }
}

double StepRecord::q_scale() const {
  return updated ? q.trace() / 3.0 : std::numeric_limits<double>::quiet_NaN();
}

FilterState SegmentTrace::exit() const {
  const auto& last = steps.back();
  return {last.mean, last.cov, last.t};
}

Matrix6d transition_matrix(double dt) {
  Matrix6d a = Matrix6d::Identity();
  a(0, 3) = a(1, 4) = a(2, 5) = dt;
  return a;
}

Matrix63d control_matrix(double dt) {
  Matrix63d b = Matrix63d::Zero();
  b(0, 0) = b(1, 1) = b(2, 2) = dt;
  return b;
}

Matrix36d measurement_matrix() {
  Matrix36d c = Matrix36d::Zero();
  c(0, 0) = c(1, 1) = c(2, 2) = 1.0;
  return c;
}

Matrix6d process_noise(double dt, double sigma_a2) {
  if (!(sigma_a2 >= 0.0)) {
    throw InputError(fmt::format("acceleration noise variance must be >= 0, got {}", sigma_a2));
  }
  const double dt2 = dt * dt;
  const double pp = 0.25 * dt2 * dt2;
  const double pv = 0.5 * dt2 * dt;
  Matrix6d r = Matrix6d::Zero();
  for (int i = 0; i < 3; ++i) {
    r(i, i) = pp;
    r(i + 3, i + 3) = dt2;
    r(i, i + 3) = r(i + 3, i) = pv;
  }
  return sigma_a2 * r;
}

double sigmoid_blend(double p, double k_gain, double lpa) {
  const double x = k_gain * (p - lpa);
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

Eigen::Matrix3d measurement_noise(double p, const FilterConfig& cfg) {
  const double s = sigmoid_blend(p, cfg.k_gain, cfg.lpa);
  return cfg.q_min + (cfg.q_max - cfg.q_min) * s;
}

FilterState predict(const FilterState& state, const Eigen::Vector3d& u, double dt,
                    double sigma_a2) {
  const Matrix6d a = transition_matrix(dt);
  FilterState out;
  out.mean = a * state.mean + control_matrix(dt) * u;
  out.cov = a * state.cov * a.transpose() + process_noise(dt, sigma_a2);
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.t = state.t + dt;
  return out;
}

UpdateResult update_with_gain(const FilterState& state, const Eigen::Vector3d& z,
                              const Eigen::Matrix3d& q) {
  const Matrix36d c = measurement_matrix();
  const Eigen::Matrix3d s = state.cov.topLeftCorner<3, 3>() + q;
  const Eigen::LLT<Eigen::Matrix3d> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("innovation covariance is not positive definite");
  }
  // K = P C^T S^-1; S is symmetric so K^T = S^-1 (C P).
  const Matrix63d k = llt.solve(state.cov.topRows<3>()).transpose();
  const Eigen::Vector3d innovation = z - state.mean.head<3>();

  UpdateResult r;
  r.gain = k;
  r.state.t = state.t;
  r.state.mean = state.mean + k * innovation;
  const Matrix6d ikc = Matrix6d::Identity() - k * c;
  r.state.cov = ikc * state.cov * ikc.transpose() + k * q * k.transpose();
  r.state.cov = 0.5 * (r.state.cov + r.state.cov.transpose());
  return r;
}

NoiseSchedule blended_schedule(const FilterConfig& cfg) {
  return [cfg](double p) -> std::optional<ScheduleEntry> {
    return ScheduleEntry{measurement_noise(p, cfg), sigmoid_blend(p, cfg.k_gain, cfg.lpa)};
  };
}

FilterState initial_state(const spline::TrajectorySpline& spline) {
  FilterState s;
  s.mean.head<3>() = spline.knot_positions().front();
  s.t = spline.start_time();
  return s;
}

SegmentTrace propagate_segment(const spline::TrajectorySpline& spline, std::size_t segment,
                               const FilterState& entry, const FilterConfig& cfg,
                               const NoiseSchedule& schedule) {
  cfg.validate();
  if (segment >= spline.segment_count()) {
    throw InputError(fmt::format("segment {} out of range ({} segments)", segment,
                                 spline.segment_count()));
  }
  const double t_start = spline.knot_times()[segment];
  const double t_end = spline.knot_times()[segment + 1];
  const double duration = t_end - t_start;
  if (std::abs(entry.t - t_start) > kTimeEps * std::max(1.0, std::abs(t_start))) {
    throw InputError(fmt::format("entry state time {} does not match segment start {}", entry.t,
                                 t_start));
  }

  SegmentTrace trace;
  trace.segment = segment;
  trace.entry = entry;

  // Step boundaries: full strides, then one partial step for any remainder.
  std::vector<double> times{t_start};
  if (cfg.dt_s > duration) {
    trace.warnings.push_back(fmt::format(
        "segment {}: dt {} s exceeds segment duration {} s; single step used", segment, cfg.dt_s,
        duration));
  } else {
    const auto full = static_cast<std::size_t>(std::floor(duration / cfg.dt_s + kTimeEps));
    for (std::size_t i = 1; i <= full; ++i) {
      times.push_back(t_start + static_cast<double>(i) * cfg.dt_s);
    }
  }
  if (t_end - times.back() > kTimeEps * std::max(1.0, duration)) {
    times.push_back(t_end);
  } else {
    times.back() = t_end;
  }

  std::vector<double> progress(times.size(), 0.0);
  bool by_distance = cfg.progress_mode == ProgressMode::Distance;
  if (by_distance) {
    std::vector<double> cum(times.size(), 0.0);
    for (std::size_t i = 1; i < times.size(); ++i) {
      cum[i] = cum[i - 1] + arc_length(spline, times[i - 1], times[i]);
    }
    if (cum.back() > 0.0) {
      for (std::size_t i = 0; i < times.size(); ++i) {
        progress[i] = std::clamp(cum[i] / cum.back(), 0.0, 1.0);
      }
    } else {
      trace.warnings.push_back(
          fmt::format("segment {}: zero arc length, falling back to time progress", segment));
      by_distance = false;
    }
  }
  if (!by_distance) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      progress[i] = std::clamp((times[i] - t_start) / duration, 0.0, 1.0);
    }
  }

  FilterState state = entry;
  state.t = t_start;
  trace.steps.reserve(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    StepRecord rec;
    rec.step = i + 1;
    rec.progress = progress[i];
    rec.dt = times[i + 1] - times[i];
    rec.u = spline.velocity_at(times[i]);
    rec.z = spline.position_at(times[i + 1]);

    state = predict(state, rec.u, rec.dt, cfg.sigma_a2);
    state.t = times[i + 1];
    rec.blend = std::numeric_limits<double>::quiet_NaN();
    if (const auto entry_q = schedule(rec.progress)) {
      auto upd = update_with_gain(state, rec.z, entry_q->q);
      state = upd.state;
      rec.updated = true;
      rec.q = entry_q->q;
      rec.blend = entry_q->blend;
      rec.gain = upd.gain;
    }
    rec.t = state.t;
    rec.mean = state.mean;
    rec.cov = state.cov;
    trace.steps.push_back(rec);
  }
  return trace;
}

std::vector<SegmentTrace> propagate_plan(const spline::TrajectorySpline& spline,
                                         const geo::LocalPlan& plan, const FilterConfig& cfg,
                                         const NoiseSchedule& schedule) {
  if (plan.size() != spline.knot_times().size()) {
    throw InputError("spline was not fitted from this plan (knot count differs)");
  }
  for (std::size_t k = 0; k < plan.size(); ++k) {
    if (plan.points[k].t != spline.knot_times()[k]) {
      throw InputError(fmt::format("spline knot {} does not match plan time", k));
    }
  }
  std::vector<SegmentTrace> traces;
  traces.reserve(spline.segment_count());
  FilterState state = initial_state(spline);
  for (std::size_t seg = 0; seg < spline.segment_count(); ++seg) {
    traces.push_back(propagate_segment(spline, seg, state, cfg, schedule));
    state = traces.back().exit();
  }
  return traces;
}

std::vector<Eigen::Vector3d> waypoint_velocity_variances(
    const std::vector<SegmentTrace>& traces) {
  std::vector<Eigen::Vector3d> out{Eigen::Vector3d::Zero()};
  for (const auto& tr : traces) {
    out.push_back(tr.waypoint_cov().diagonal().tail<3>());
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<SegmentTrace>& traces) {
  out << "segment,step,t,p,sigma_blend,q_scale,x,y,z,vx,vy,vz,"
         "var_x,var_y,var_z,var_vx,var_vy,var_vz,trace\n";
  const auto row = [&out](std::size_t seg, std::size_t step, double t, double p, double blend,
                          double q_scale, const Vector6d& mean, const Matrix6d& cov) {
    out << seg << ',' << step << ',' << fmt_double(t) << ',' << fmt_double(p) << ','
        << fmt_double(blend) << ',' << fmt_double(q_scale);
    for (int i = 0; i < 6; ++i) {
      out << ',' << fmt_double(mean[i]);
    }
    for (int i = 0; i < 6; ++i) {
      out << ',' << fmt_double(cov(i, i));
    }
    out << ',' << fmt_double(cov.trace()) << '\n';
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!traces.empty()) {
    const auto& e = traces.front().entry;
    row(0, 0, e.t, 0.0, nan, nan, e.mean, e.cov);
  }
  for (const auto& tr : traces) {
    for (const auto& s : tr.steps) {
      row(tr.segment, s.step, s.t, s.progress, s.blend, s.q_scale(), s.mean, s.cov);
    }
  }
}

} // namespace rtaprop::filter
