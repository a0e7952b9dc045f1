#ifndef RTAPROP_CONFIG_HPP_
#define RTAPROP_CONFIG_HPP_

#include "rtaprop/baseline.hpp"
#include "rtaprop/filter.hpp"
#include "rtaprop/rta.hpp"
#include "rtaprop/tuning.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rtaprop {

/// Every tunable of a run. Parsed from a flat `key = value` file whose keys
/// carry their units (see docs/formats.md); unspecified keys keep defaults.
struct RunConfig {
  filter::FilterConfig filter;
  rta::RtaConfig rta;
  baseline::UlpaConfig ulpa;
  baseline::McConfig mc;
  tuning::TuningConfig tuning;

  void set_seed(std::uint64_t seed) {
    mc.seed = seed;
    tuning.seed = seed;
  }
  void set_jobs(std::size_t jobs) {
    mc.jobs = jobs;
    tuning.jobs = jobs;
  }
  void validate() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved parameters in a fixed key order, for manifests.
std::vector<std::pair<std::string, std::string>> config_snapshot(const RunConfig& cfg);

} // namespace rtaprop

#endif // RTAPROP_CONFIG_HPP_
