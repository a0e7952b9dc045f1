#include "rtaprop/io.hpp"

#include "rtaprop/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace rtaprop::io {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError(fmt::format("cannot open '{}'", path.string()));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InputError(fmt::format("cannot write '{}'", path.string()));
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw InputError(fmt::format("write to '{}' failed", path.string()));
  }
}

} // namespace rtaprop::io
