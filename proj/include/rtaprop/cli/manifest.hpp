#ifndef RTAPROP_CLI_MANIFEST_HPP_
#define RTAPROP_CLI_MANIFEST_HPP_

#include "rtaprop/config.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace rtaprop::cli {

/// Everything needed to reproduce a run. Contains no timestamps or absolute
/// paths, so identical inputs and parameters give an identical manifest.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> input_digests; ///< (name, sha256 hex)
  std::string tool_version;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;

  void add_input(const std::filesystem::path& path, const std::string& name);
  std::string to_json() const;
};

std::string sha256_hex(std::string_view data);

} // namespace rtaprop::cli

#endif // RTAPROP_CLI_MANIFEST_HPP_
