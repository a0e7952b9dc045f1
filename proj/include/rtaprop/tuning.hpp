#ifndef RTAPROP_TUNING_HPP_
#define RTAPROP_TUNING_HPP_

#include "rtaprop/filter.hpp"
#include "rtaprop/geo.hpp"
#include "rtaprop/rta.hpp"
#include "rtaprop/spline.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtaprop::tuning {

struct AdsbSample {
  double t = 0.0; ///< seconds, Unix epoch
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
  std::optional<double> gs_mps;
};

struct AdsbTrack {
  std::string flight_id;
  std::vector<AdsbSample> samples; ///< strictly increasing t
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t dropped_out_of_range = 0;
  std::size_t duplicates_removed = 0;
  bool was_unsorted = false;
};

struct ParsedTrack {
  AdsbTrack track;
  IngestReport report;
};

/// Parses ADS-B CSV with header columns timestamp, flight_id, lat, lon,
/// alt_m and optional gs_mps. All rows must share one flight_id.
ParsedTrack parse_adsb(std::string_view text);
ParsedTrack load_adsb(const std::filesystem::path& path);
std::string serialize_adsb(const AdsbTrack& track);

struct Deviation {
  double t;                  ///< plan-local seconds after alignment
  Eigen::Vector3d deviation; ///< observed - planned, ENU meters
};

struct DeviationSeries {
  std::string flight_id;
  double epoch_offset = 0.0; ///< track timestamp that maps to plan-local t = 0
  std::vector<Deviation> samples;

  double rms() const;
};

/// Track timestamp that maps to the plan's start: the sample closest to the
/// first waypoint, refined by a local clock fit of the planned path against
/// samples within 30 s of it.
double align_epoch(const AdsbTrack& track, const geo::LocalFrame& frame,
                   const spline::TrajectorySpline& spline);

DeviationSeries match_track_to_plan(const AdsbTrack& track, const geo::LocalPlan& plan,
                                    const spline::TrajectorySpline& spline);

/// Unbiased (n - 1) sample covariance of the deviation vectors.
Eigen::Matrix3d extract_covariance(const DeviationSeries& dev);

Eigen::Matrix3d average_covariances(const std::vector<Eigen::Matrix3d>& per_flight);

struct FlightPair {
  AdsbTrack track;
  geo::LocalPlan plan;
};

struct PruneEntry {
  std::string flight_id;
  double rms_m;
  bool retained;
};

struct PruneResult {
  std::vector<std::size_t> retained; ///< indices into the input list, ascending
  std::vector<PruneEntry> report;
};

PruneResult prune_tracks(const std::vector<FlightPair>& pairs, double max_rms_m);

/// Plan-local time at which the track passes waypoint k. A local clock
/// (offset and rate) is fitted so the planned path matches the samples within
/// min(30 s, half the adjacent segment) of k's RTA; nullopt if fewer than 3
/// samples fall in that window.
std::optional<double> observed_arrival(const AdsbTrack& track, const geo::LocalPlan& plan,
                                       const spline::TrajectorySpline& spline,
                                       double epoch_offset, std::size_t k);
/// Fraction of flights whose actual arrival lies in [lower, upper].
double arrival_accuracy(const std::vector<rta::RtaEstimate>& predictions,
                        const std::vector<double>& actuals);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> verify;
};
/// Seeded Fisher-Yates split by flight; both halves sorted ascending.
Split split_train_verify(std::size_t n, double train_fraction, std::uint64_t seed);

struct TuningConfig {
  double max_rms_m = 500.0;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct FlightStats {
  std::string flight_id;
  bool train = false;
  double rms_m = 0.0;
  std::size_t matched_samples = 0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  std::optional<double> actual_arrival;
  std::optional<rta::RtaEstimate> predicted_arrival;
  bool covered = false;
};

struct TuningResult {
  Eigen::Matrix3d q_max_estimate = Eigen::Matrix3d::Zero();
  std::size_t flights_used = 0; ///< retained training flights averaged into Q_max
  std::vector<FlightStats> flights;
  std::vector<PruneEntry> pruning;
  double accuracy = 0.0;         ///< final-waypoint coverage on the verification split
  std::size_t verified = 0;      ///< verification flights with an observed arrival
  std::vector<double> per_waypoint_coverage; ///< auxiliary, index 0 is the start
  double confidence = 0.95;
};

/// Full pipeline: split, prune, extract and average Q_max on the training
/// split, then score final-waypoint arrival coverage on the verification split
/// with Q_max replaced by the estimate.
TuningResult run_tuning(const std::vector<FlightPair>& pairs, const TuningConfig& tcfg,
                        const filter::FilterConfig& fcfg, const rta::RtaConfig& rcfg);

std::string tuning_report_json(const TuningResult& result);

// ---------------------------------------------------------------------------
// Synthetic corpus generation (fixtures and self-consistency checks)
// ---------------------------------------------------------------------------

struct SynthConfig {
  Eigen::Matrix3d noise_cov = Eigen::Matrix3d::Identity() * 100.0; ///< m^2, ENU
  double arrival_sigma_s = 0.0; ///< final-arrival jitter applied as a uniform time warp
  std::size_t samples = 1000;
  double epoch_s = 1.7e9;
  std::uint64_t seed = 1;
};

struct SyntheticFlight {
  AdsbTrack track;
  double true_arrival = 0.0; ///< plan-local seconds at the final waypoint
};

/// Flight `index` of a corpus: the spline flown with its clock stretched so
/// the final waypoint is reached at T + N(0, arrival_sigma^2), sampled
/// uniformly and perturbed by N(0, noise_cov). Stream = index.
SyntheticFlight synthesize_flight(const geo::LocalPlan& plan,
                                  const spline::TrajectorySpline& spline, const SynthConfig& cfg,
                                  std::size_t index, std::string flight_id);

} // namespace rtaprop::tuning

#endif // RTAPROP_TUNING_HPP_
