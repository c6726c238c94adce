#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace oam::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Parses a full-length floating point field; throws oam::ParseError naming `row`.
double parse_double(std::string_view field, std::size_t row, std::string_view column);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

std::string join(const std::vector<std::string>& fields, char sep = ',');

/// Writes through a sibling temporary file and renames it into place.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

}  // namespace oam::csv
