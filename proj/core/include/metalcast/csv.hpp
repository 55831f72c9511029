#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace metalcast::csv {

// Minimal reader for the engine's own comma separated files. None of the
// formats use quoting, so fields are split on every comma.

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view text);

/// Parses a double; throws ParseError tagged with `line` on failure.
double to_double(std::string_view field, std::size_t line);
int to_int(std::string_view field, std::size_t line);

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::string& path);
/// Writes a whole file; throws IoError on failure.
void write_file(const std::string& path, std::string_view content);

}  // namespace metalcast::csv
