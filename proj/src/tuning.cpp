#include "rtaprop/tuning.hpp"

#include "rtaprop/error.hpp"
#include "rtaprop/parallel.hpp"
#include "rtaprop/random.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>

namespace rtaprop::tuning {

namespace {

constexpr std::array<std::string_view, 6> kColumns{"timestamp", "flight_id", "lat",
                                                   "lon",       "alt_m",     "gs_mps"};

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
      field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no, std::string_view column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InputError(fmt::format("line {}: column '{}' is not a number: '{}'", line_no, column,
                                 field));
  }
  return v;
}

Eigen::Matrix3d psd_sqrt(const Eigen::Matrix3d& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// Half-width of the local fitting windows used for alignment and arrival.
constexpr double kFitWindowS = 30.0;

// Local clock fit: plan time tau(t) = t_ref + a + b (t - t_ref) such that the
// observed positions match the planned path at tau (Gauss-Newton on a, b over
// samples with t in [lo, hi]). Returns the sample-clock time at which the plan
// reaches t_ref, or nullopt when fewer than 3 samples constrain the fit.
std::optional<double> fit_local_clock(std::span<const double> t_local,
                                      std::span<const Eigen::Vector3d> observed,
                                      const spline::TrajectorySpline& spline, double t_ref,
                                      double lo, double hi) {
  double a = 0.0, b = 1.0;
  bool constrained = false;
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    int used = 0;
    for (std::size_t i = 0; i < t_local.size(); ++i) {
      if (t_local[i] < lo || t_local[i] > hi) {
        continue;
      }
      const double dt = t_local[i] - t_ref;
      const double tau = t_ref + a + b * dt;
      if (tau < spline.start_time() || tau > spline.end_time()) {
        continue;
      }
      const Eigen::Vector3d v = spline.velocity_at(tau);
      const double vv = v.squaredNorm();
      const double rv = (observed[i] - spline.position_at(tau)).dot(v);
      normal(0, 0) += vv;
      normal(0, 1) += vv * dt;
      normal(1, 1) += vv * dt * dt;
      grad(0) += rv;
      grad(1) += rv * dt;
      ++used;
    }
    if (used < 3 || !(normal(0, 0) > 0.0)) {
      break;
    }
    constrained = true;
    normal(1, 0) = normal(0, 1);
    Eigen::Vector2d step(grad(0) / normal(0, 0), 0.0);
    if (normal.determinant() > 1e-9 * normal(0, 0) * normal(1, 1)) {
      step = normal.ldlt().solve(grad);
    }
    step(0) = std::clamp(step(0), -kFitWindowS, kFitWindowS);
    a += step(0);
    b = std::clamp(b + step(1), 0.5, 2.0);
    if (std::abs(step(0)) < 1e-10 && std::abs(step(1)) < 1e-12) {
      break;
    }
  }
  if (!constrained) {
    return std::nullopt;
  }
  return t_ref - a / b;
}

std::vector<Eigen::Vector3d> to_local(const AdsbTrack& track, const geo::LocalFrame& frame) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(track.samples.size());
  for (const auto& s : track.samples) {
    out.push_back(frame.to_local({s.lat_deg, s.lon_deg, s.alt_m}));
  }
  return out;
}

} // namespace

ParsedTrack parse_adsb(std::string_view text) {
  ParsedTrack out;
  std::size_t line_no = 0;
  std::array<int, kColumns.size()> col{};
  col.fill(-1);
  bool have_header = false;
  std::size_t n_fields = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    pos = nl == text.npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto fields = split_csv(line);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto it = std::find(kColumns.begin(), kColumns.end(), fields[i]);
        if (it == kColumns.end()) {
          throw InputError(fmt::format("line {}: unknown column '{}'", line_no, fields[i]));
        }
        auto& slot = col[static_cast<std::size_t>(it - kColumns.begin())];
        if (slot >= 0) {
          throw InputError(fmt::format("line {}: duplicate column '{}'", line_no, fields[i]));
        }
        slot = static_cast<int>(i);
      }
      for (std::size_t c = 0; c < 5; ++c) {
        if (col[c] < 0) {
          throw InputError(fmt::format("missing required column '{}'", kColumns[c]));
        }
      }
      n_fields = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_fields) {
      throw InputError(fmt::format("line {}: expected {} fields, got {}", line_no, n_fields,
                                   fields.size()));
    }
    ++out.report.rows_read;
    const auto field = [&](std::size_t c) { return fields[static_cast<std::size_t>(col[c])]; };
    const std::string id(field(1));
    if (out.track.flight_id.empty()) {
      out.track.flight_id = id;
    } else if (id != out.track.flight_id) {
      throw InputError(fmt::format("line {}: second flight_id '{}' (file holds '{}')", line_no,
                                   id, out.track.flight_id));
    }
    AdsbSample s;
    s.t = parse_double(field(0), line_no, kColumns[0]);
    s.lat_deg = parse_double(field(2), line_no, kColumns[2]);
    s.lon_deg = parse_double(field(3), line_no, kColumns[3]);
    s.alt_m = parse_double(field(4), line_no, kColumns[4]);
    if (col[5] >= 0 && !field(5).empty()) {
      s.gs_mps = parse_double(field(5), line_no, kColumns[5]);
    }
    if (!std::isfinite(s.t) || !std::isfinite(s.alt_m) || !(s.lat_deg >= -90.0) ||
        !(s.lat_deg <= 90.0) || !(s.lon_deg >= -180.0) || !(s.lon_deg <= 180.0)) {
      ++out.report.dropped_out_of_range;
      continue;
    }
    out.track.samples.push_back(s);
  }
  if (!have_header) {
    throw InputError("ADS-B file has no header");
  }
  auto& samples = out.track.samples;
  if (samples.empty()) {
    throw InputError("ADS-B track is empty");
  }
  const auto by_time = [](const AdsbSample& a, const AdsbSample& b) { return a.t < b.t; };
  if (!std::is_sorted(samples.begin(), samples.end(), by_time)) {
    out.report.was_unsorted = true;
    std::stable_sort(samples.begin(), samples.end(), by_time);
  }
  const auto last = std::unique(samples.begin(), samples.end(),
                                [](const AdsbSample& a, const AdsbSample& b) { return a.t == b.t; });
  out.report.duplicates_removed = static_cast<std::size_t>(samples.end() - last);
  samples.erase(last, samples.end());
  return out;
}

ParsedTrack load_adsb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError(fmt::format("cannot open ADS-B file '{}'", path.string()));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_adsb(ss.str());
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string serialize_adsb(const AdsbTrack& track) {
  const bool with_gs = std::any_of(track.samples.begin(), track.samples.end(),
                                   [](const AdsbSample& s) { return s.gs_mps.has_value(); });
  std::string out = with_gs ? "timestamp,flight_id,lat,lon,alt_m,gs_mps\n"
                            : "timestamp,flight_id,lat,lon,alt_m\n";
  for (const auto& s : track.samples) {
    out += fmt::format("{:.3f},{},{:.9f},{:.9f},{:.3f}", s.t, track.flight_id, s.lat_deg,
                       s.lon_deg, s.alt_m);
    if (with_gs) {
      out += s.gs_mps ? fmt::format(",{:.3f}", *s.gs_mps) : std::string(",");
    }
    out += '\n';
  }
  return out;
}

double DeviationSeries::rms() const {
  if (samples.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  CompensatedSum sum;
  for (const auto& d : samples) {
    sum.add(d.deviation.squaredNorm());
  }
  return std::sqrt(sum.value() / static_cast<double>(samples.size()));
}

double align_epoch(const AdsbTrack& track, const geo::LocalFrame& frame,
                   const spline::TrajectorySpline& spline) {
  if (track.samples.empty()) {
    throw InputError("cannot align an empty track");
  }
  const auto local = to_local(track, frame);
  const Eigen::Vector3d first = spline.position_at(spline.start_time());
  std::size_t best = 0;
  for (std::size_t i = 1; i < local.size(); ++i) {
    if ((local[i] - first).norm() < (local[best] - first).norm()) {
      best = i;
    }
  }
  // Refine with a local clock fit of the planned path against the samples
  // near the closest one, so noise on a single sample does not pick the epoch.
  const double t0 = spline.start_time();
  const double coarse = track.samples[best].t - t0;
  std::vector<double> t_local;
  t_local.reserve(local.size());
  for (const auto& s : track.samples) {
    t_local.push_back(s.t - coarse);
  }
  const auto at_start =
      fit_local_clock(t_local, local, spline, t0, t0 - kFitWindowS, t0 + kFitWindowS);
  return coarse + at_start.value_or(t0) - t0;
}

DeviationSeries match_track_to_plan(const AdsbTrack& track, const geo::LocalPlan& plan,
                                    const spline::TrajectorySpline& spline) {
  const geo::LocalFrame frame = plan.frame();
  DeviationSeries out;
  out.flight_id = track.flight_id;
  out.epoch_offset = align_epoch(track, frame, spline);
  for (const auto& s : track.samples) {
    const double t = s.t - out.epoch_offset;
    if (t < spline.start_time() || t > spline.end_time()) {
      continue;
    }
    out.samples.push_back(
        {t, frame.to_local({s.lat_deg, s.lon_deg, s.alt_m}) - spline.position_at(t)});
  }
  if (out.samples.empty()) {
    throw InputError(fmt::format("flight '{}': no temporal overlap with plan '{}'",
                                 track.flight_id, plan.plan_id));
  }
  return out;
}

Eigen::Matrix3d extract_covariance(const DeviationSeries& dev) {
  const std::size_t n = dev.samples.size();
  if (n < 2) {
    throw InputError(fmt::format("flight '{}': need >= 2 matched samples for a covariance, got {}",
                                 dev.flight_id, n));
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& d : dev.samples) {
    mean += d.deviation;
  }
  mean /= static_cast<double>(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& d : dev.samples) {
    const Eigen::Vector3d c = d.deviation - mean;
    cov += c * c.transpose();
  }
  cov /= static_cast<double>(n - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::Matrix3d average_covariances(const std::vector<Eigen::Matrix3d>& per_flight) {
  if (per_flight.empty()) {
    throw InputError("no covariances to average");
  }
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  for (const auto& c : per_flight) {
    sum += c;
  }
  const Eigen::Matrix3d mean = sum / static_cast<double>(per_flight.size());
  return 0.5 * (mean + mean.transpose());
}

PruneResult prune_tracks(const std::vector<FlightPair>& pairs, double max_rms_m) {
  PruneResult out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    double rms = std::numeric_limits<double>::infinity();
    try {
      const auto spline = spline::fit_trajectory(pairs[i].plan);
      rms = match_track_to_plan(pairs[i].track, pairs[i].plan, spline).rms();
    } catch (const InputError&) {
    }
    const bool keep = rms <= max_rms_m;
    out.report.push_back({pairs[i].track.flight_id, rms, keep});
    if (keep) {
      out.retained.push_back(i);
    }
  }
  return out;
}

std::optional<double> observed_arrival(const AdsbTrack& track, const geo::LocalPlan& plan,
                                       const spline::TrajectorySpline& spline,
                                       double epoch_offset, std::size_t k) {
  if (k < 1 || k >= plan.size()) {
    throw InputError(fmt::format("waypoint {} has no incoming segment", k));
  }
  const double tk = plan.points[k].t;
  const double before = std::min(kFitWindowS, 0.5 * (tk - plan.points[k - 1].t));
  const double after =
      k + 1 < plan.size() ? std::min(kFitWindowS, 0.5 * (plan.points[k + 1].t - tk)) : before;
  const auto local = to_local(track, plan.frame());
  std::vector<double> t_local;
  t_local.reserve(local.size());
  std::size_t inside = 0;
  for (const auto& s : track.samples) {
    t_local.push_back(s.t - epoch_offset);
    inside += t_local.back() >= tk - before && t_local.back() <= tk + after;
  }
  if (inside < 3) {
    return std::nullopt;
  }
  return fit_local_clock(t_local, local, spline, tk, tk - before, tk + after);
}

double arrival_accuracy(const std::vector<rta::RtaEstimate>& predictions,
                        const std::vector<double>& actuals) {
  if (predictions.size() != actuals.size()) {
    throw InputError(fmt::format("{} predictions but {} actual arrivals", predictions.size(),
                                 actuals.size()));
  }
  if (predictions.empty()) {
    throw InputError("no flights to score");
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (actuals[i] >= predictions[i].lower && actuals[i] <= predictions[i].upper) {
      ++hit;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(actuals.size());
}

Split split_train_verify(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw InputError(fmt::format("train fraction must lie in (0, 1], got {}", train_fraction));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Philox rng(seed, 0x5EED5EEDull);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, n > 0 ? 1 : 0, n);
  Split out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.verify.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.verify.begin(), out.verify.end());
  return out;
}

TuningResult run_tuning(const std::vector<FlightPair>& pairs, const TuningConfig& tcfg,
                        const filter::FilterConfig& fcfg, const rta::RtaConfig& rcfg) {
  if (pairs.empty()) {
    throw InputError("no flights retained: the corpus is empty");
  }
  TuningResult result;
  result.confidence = rcfg.confidence;
  const Split split = split_train_verify(pairs.size(), tcfg.train_fraction, tcfg.seed);

  result.flights.resize(pairs.size());
  std::vector<std::optional<DeviationSeries>> deviations(pairs.size());
  parallel_for(pairs.size(), tcfg.jobs, [&](std::size_t i) {
    auto& fs = result.flights[i];
    fs.flight_id = pairs[i].track.flight_id;
    fs.rms_m = std::numeric_limits<double>::infinity();
    try {
      const auto spline = spline::fit_trajectory(pairs[i].plan);
      deviations[i] = match_track_to_plan(pairs[i].track, pairs[i].plan, spline);
      fs.rms_m = deviations[i]->rms();
      fs.matched_samples = deviations[i]->samples.size();
      if (fs.matched_samples >= 2) {
        fs.covariance = extract_covariance(*deviations[i]);
      }
    } catch (const InputError&) {
      deviations[i].reset();
    }
  });
  for (auto i : split.train) {
    result.flights[i].train = true;
  }

  std::vector<bool> retained(pairs.size(), false);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& fs = result.flights[i];
    retained[i] = deviations[i].has_value() && fs.matched_samples >= 2 && fs.rms_m <= tcfg.max_rms_m;
    result.pruning.push_back({fs.flight_id, fs.rms_m, retained[i]});
  }

  std::vector<Eigen::Matrix3d> train_covs;
  for (auto i : split.train) {
    if (retained[i]) {
      train_covs.push_back(result.flights[i].covariance);
    }
  }
  if (train_covs.empty()) {
    throw InputError(
        fmt::format("no flights retained: 0 of {} training flights within max RMS {} m",
                    split.train.size(), tcfg.max_rms_m));
  }
  result.q_max_estimate = average_covariances(train_covs);
  result.flights_used = train_covs.size();

  filter::FilterConfig tuned = fcfg;
  tuned.q_max = result.q_max_estimate;
  try {
    tuned.validate();
  } catch (const InputError& e) {
    throw NumericalError(fmt::format("estimated Q_max is unusable: {}", e.what()));
  }

  std::size_t max_wp = 0;
  for (const auto& p : pairs) {
    max_wp = std::max(max_wp, p.plan.size());
  }
  std::vector<std::vector<int>> wp_hits(pairs.size());
  parallel_for(split.verify.size(), tcfg.jobs, [&](std::size_t v) {
    const std::size_t i = split.verify[v];
    if (!retained[i]) {
      return;
    }
    auto& fs = result.flights[i];
    const auto& plan = pairs[i].plan;
    const auto spline = spline::fit_trajectory(plan);
    const auto traces = filter::propagate_plan(spline, plan, tuned);
    const auto estimates = rta::estimate_rtas(plan, traces, rcfg);
    const double epoch = deviations[i]->epoch_offset;
    wp_hits[i].assign(plan.size(), -1);
    for (std::size_t k = 1; k < plan.size(); ++k) {
      const auto arrival = observed_arrival(pairs[i].track, plan, spline, epoch, k);
      if (!arrival) {
        continue;
      }
      const double actual = plan.origin.rta_s + *arrival;
      const bool hit = actual >= estimates[k].lower && actual <= estimates[k].upper;
      wp_hits[i][k] = hit ? 1 : 0;
      if (k + 1 == plan.size()) {
        fs.actual_arrival = actual;
        fs.predicted_arrival = estimates[k];
        fs.covered = hit;
      }
    }
  });

  std::vector<rta::RtaEstimate> preds;
  std::vector<double> actuals;
  std::vector<std::size_t> wp_n(max_wp, 0), wp_hit(max_wp, 0);
  for (auto i : split.verify) {
    const auto& fs = result.flights[i];
    if (fs.actual_arrival && fs.predicted_arrival) {
      preds.push_back(*fs.predicted_arrival);
      actuals.push_back(*fs.actual_arrival);
    }
    for (std::size_t k = 1; k < wp_hits[i].size(); ++k) {
      if (wp_hits[i][k] >= 0) {
        ++wp_n[k];
        wp_hit[k] += static_cast<std::size_t>(wp_hits[i][k]);
      }
    }
  }
  result.verified = preds.size();
  result.accuracy = preds.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : arrival_accuracy(preds, actuals);
  result.per_waypoint_coverage.assign(max_wp, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 1; k < max_wp; ++k) {
    if (wp_n[k] > 0) {
      result.per_waypoint_coverage[k] =
          static_cast<double>(wp_hit[k]) / static_cast<double>(wp_n[k]);
    }
  }
  return result;
}

std::string tuning_report_json(const TuningResult& r) {
  using nlohmann::json;
  const auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  const auto mat = [](const Eigen::Matrix3d& m) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) {
      rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    }
    return rows;
  };
  json doc;
  doc["q_max_estimate_m2"] = mat(r.q_max_estimate);
  doc["flights_used"] = r.flights_used;
  doc["confidence"] = r.confidence;
  doc["accuracy"] = num(r.accuracy);
  doc["verified_flights"] = r.verified;
  json cov = json::array();
  for (double c : r.per_waypoint_coverage) {
    cov.push_back(num(c));
  }
  doc["per_waypoint_coverage"] = cov;
  json pruning = json::array();
  for (const auto& p : r.pruning) {
    pruning.push_back({{"flight_id", p.flight_id}, {"rms_m", num(p.rms_m)}, {"retained", p.retained}});
  }
  doc["pruning"] = pruning;
  json flights = json::array();
  for (const auto& f : r.flights) {
    json fj{{"flight_id", f.flight_id},
            {"split", f.train ? "train" : "verify"},
            {"rms_m", num(f.rms_m)},
            {"matched_samples", f.matched_samples},
            {"covariance_m2", mat(f.covariance)}};
    if (f.actual_arrival && f.predicted_arrival) {
      fj["actual_arrival_s"] = *f.actual_arrival;
      fj["nominal_arrival_s"] = f.predicted_arrival->nominal_rta;
      fj["lower_s"] = f.predicted_arrival->lower;
      fj["upper_s"] = f.predicted_arrival->upper;
      fj["covered"] = f.covered;
    }
    flights.push_back(std::move(fj));
  }
  doc["flights"] = flights;
  return doc.dump(2) + "\n";
}

SyntheticFlight synthesize_flight(const geo::LocalPlan& plan,
                                  const spline::TrajectorySpline& spline, const SynthConfig& cfg,
                                  std::size_t index, std::string flight_id) {
  if (cfg.samples < 2) {
    throw InputError("synthetic flights need >= 2 samples");
  }
  Philox rng(cfg.seed, index);
  const double t0 = spline.start_time();
  const double duration = spline.end_time() - t0;
  const double flown = duration + cfg.arrival_sigma_s * rng.normal();
  if (!(flown > 0.0)) {
    throw InputError("arrival jitter produced a non-positive flight duration");
  }
  const Eigen::Matrix3d noise_sqrt = psd_sqrt(cfg.noise_cov);
  const geo::LocalFrame frame = plan.frame();
  SyntheticFlight out;
  out.track.flight_id = std::move(flight_id);
  out.true_arrival = t0 + flown;
  // Distinct departure epochs per flight exercise the alignment step.
  const double epoch = cfg.epoch_s + 3600.0 * static_cast<double>(index);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const double tau = flown * static_cast<double>(i) / static_cast<double>(cfg.samples - 1);
    const double plan_t = std::min(t0 + tau * duration / flown, spline.end_time());
    const Eigen::Vector3d xi(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d p = spline.position_at(plan_t) + noise_sqrt * xi;
    const auto g = frame.to_geodetic(p);
    out.track.samples.push_back({epoch + tau, g.lat_deg, g.lon_deg, g.alt_m, std::nullopt});
  }
  return out;
}

} // namespace rtaprop::tuning
