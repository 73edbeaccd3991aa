#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace traitkit {

// Shortest representation that round-trips the exact double value.
std::string fmt_double(double value);

// Strict full-token parse; reports `context` and 1-based `line_no` on failure.
double parse_double(std::string_view token, std::string_view context, std::size_t line_no);
std::int64_t parse_int(std::string_view token, std::string_view context, std::size_t line_no);
std::uint64_t parse_uint(std::string_view token, std::string_view context, std::size_t line_no);

namespace csv {

// The project's file formats are comma-separated without quoting; fields may
// not contain commas or newlines.
std::vector<std::string> split_fields(std::string_view line);

// Reads all lines, accepting LF and CRLF endings.
std::vector<std::string> read_lines(std::istream& in);

void require_header(const std::string& got, const std::string& expected,
                    std::string_view what);

}  // namespace csv
}  // namespace traitkit
