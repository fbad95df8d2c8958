#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pigflow {

/// Shortest decimal form that round-trips the exact double. Keeps CSV
/// and model files byte-stable across reruns.
std::string format_double(double v);

/// Strict double parse of the whole field; ok=false on trailing junk,
/// empty input, or non-finite text.
double parse_double(std::string_view text, bool& ok);

std::int64_t parse_int64(std::string_view text, bool& ok);

/// Splits one CSV line on ',' (no quoting in any toolkit schema).
std::vector<std::string_view> split_csv(std::string_view line);

/// Reads a whole file; throws Error when missing/unreadable.
std::string read_file(const std::string& path);

/// Write-temp-then-rename so partially written artifacts never exist
/// under their final name.
void write_file_atomic(const std::string& path, std::string_view content);

} // namespace pigflow
