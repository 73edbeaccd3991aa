#include "traitkit/csv.hpp"

#include <charconv>
#include <cmath>

#include "traitkit/error.hpp"

namespace traitkit {

std::string fmt_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

[[noreturn]] void fail_token(std::string_view token, std::string_view context,
                             std::size_t line_no, const char* kind) {
  std::string msg = "line " + std::to_string(line_no) + ": " + std::string(context) +
                    ": expected " + kind + ", got '" + std::string(token) + "'";
  throw DataError(msg);
}

}  // namespace

double parse_double(std::string_view token, std::string_view context, std::size_t line_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) {
    fail_token(token, context, line_no, "a number");
  }
  return value;
}

std::int64_t parse_int(std::string_view token, std::string_view context, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
    fail_token(token, context, line_no, "an integer");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view token, std::string_view context, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
    fail_token(token, context, line_no, "a non-negative integer");
  }
  return value;
}

namespace csv {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void require_header(const std::string& got, const std::string& expected,
                    std::string_view what) {
  if (got != expected) {
    throw DataError(std::string(what) + ": expected header '" + expected + "', got '" +
                    got + "'");
  }
}

}  // namespace csv
}  // namespace traitkit
