#ifndef RTAPROP_IO_HPP_
#define RTAPROP_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace rtaprop::io {

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for batch use: truncates and writes the whole buffer.
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace rtaprop::io

#endif // RTAPROP_IO_HPP_
