#pragma once

// Helpers shared by the TSV readers and writers.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "weakmatch/error.hpp"

namespace weakmatch::tsv {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] inline void bad_row(const std::filesystem::path& path, std::size_t line,
                                 const std::string& why) {
  throw FormatError(path.string() + ":" + std::to_string(line) + ": " + why);
}

inline int parse_int(const std::string& field, int lo, int hi,
                     const std::filesystem::path& path, std::size_t line, const char* column) {
  int v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    bad_row(path, line, std::string("column ") + column + " is not an integer: '" + field + "'");
  }
  if (v < lo || v > hi) {
    bad_row(path, line,
            std::string("column ") + column + " = " + field + " outside [" + std::to_string(lo) +
                "," + std::to_string(hi) + "]");
  }
  return v;
}

inline double parse_double(const std::string& field, const std::filesystem::path& path,
                           std::size_t line, const char* column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    bad_row(path, line, std::string("column ") + column + " is not a number: '" + field + "'");
  }
  return v;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  return out;
}

}  // namespace weakmatch::tsv
