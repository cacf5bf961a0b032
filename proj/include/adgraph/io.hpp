#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace adgraph::io {

/// Whole-file read; throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes `content`, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Calls `fn(line, line_number)` for each line (1-based), without the
/// trailing newline or carriage return.
template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, ++line_no);
    pos = end + 1;
  }
}

}  // namespace adgraph::io
