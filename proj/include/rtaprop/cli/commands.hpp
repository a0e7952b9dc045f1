#ifndef RTAPROP_CLI_COMMANDS_HPP_
#define RTAPROP_CLI_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>

namespace rtaprop::cli {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int {
  kSuccess = 0,
  kUnexpected = 1,
  kInputError = 2,
  kNumericalError = 3,
};

struct CommonOptions {
  std::optional<std::filesystem::path> config; ///< defaults apply when absent
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

/// geo -> spline -> filter -> rta; writes trace.csv, bounds.csv, manifest.json.
void cmd_propagate(const std::filesystem::path& plan_file, const CommonOptions& opts);

/// Blended vs gated vs uLPA vs Monte Carlo on one plan; see README for outputs.
void cmd_compare(const std::filesystem::path& plan_file, const CommonOptions& opts);

/// Tunes Q_max from ADS-B tracks (adsb_dir/*.csv) against plans (plans_dir/*.json)
/// matched by flight_id == plan_id; writes tuning_report.json.
void cmd_tune(const std::filesystem::path& adsb_dir, const std::filesystem::path& plans_dir,
              const CommonOptions& opts);

struct SynthOptions {
  std::size_t flights = 20;
  std::size_t samples = 1000;
  double noise_sd_m = 10.0;
  double arrival_sigma_s = 0.0;
};
/// Writes a synthetic corpus (adsb/ and plans/) flown along one plan.
void cmd_synth(const std::filesystem::path& plan_file, const SynthOptions& synth,
               const CommonOptions& opts);

/// Entry point shared by the executable and the tests; returns an ExitCode.
int run(int argc, const char* const* argv);

} // namespace rtaprop::cli

#endif // RTAPROP_CLI_COMMANDS_HPP_
