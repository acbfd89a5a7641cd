#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fingraph::csv {

/// Splits one CSV line on commas. The file formats here never quote fields.
std::vector<std::string> split(const std::string& line);

/// Shortest round-trip decimal form of a double. Reparsing gives back the
/// identical bits, which keeps every exported file byte-deterministic.
std::string format_double(double v);

double parse_double(const std::string& s, const std::string& context);

/// Whole file as lines; throws FileError naming the path when unreadable.
/// Trailing blank lines are dropped, CR-LF endings tolerated.
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace fingraph::csv
