#include "fanning/point_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace fanning::io {

namespace {

std::string_view strip(std::string_view s) {
  const auto hash = s.find('#');
  if (hash != std::string_view::npos) s = s.substr(0, hash);
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto start = s.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    auto end = s.find_first_of(" \t", start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    pos = end;
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  throw FormatError(source + ":" + std::to_string(line) + ": " + msg);
}

long parse_header_field(std::string_view token, std::string_view key, const std::string& source, int line) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key || token[key.size()] != '=') {
    fail(source, line, "malformed header, expected 'd=<dim> n=<count>'");
  }
  const std::string_view digits = token.substr(key.size() + 1);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    fail(source, line, "malformed header value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

Points parse_point_set(std::istream& in, const std::string& source_name) {
  std::string raw;
  int line_no = 0;
  long dim = -1;
  long count = -1;
  std::vector<double> values;
  long rows_read = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip(raw);
    if (line.empty()) continue;
    const auto toks = tokens(line);

    if (dim < 0) {
      if (toks.size() != 2) fail(source_name, line_no, "malformed header, expected 'd=<dim> n=<count>'");
      dim = parse_header_field(toks[0], "d", source_name, line_no);
      count = parse_header_field(toks[1], "n", source_name, line_no);
      if (dim < 1) fail(source_name, line_no, "dimension must be >= 1");
      if (count < 1) fail(source_name, line_no, "point count must be >= 1");
      values.reserve(static_cast<std::size_t>(dim * count));
      continue;
    }

    if (static_cast<long>(toks.size()) != dim) {
      fail(source_name, line_no, "expected " + std::to_string(dim) + " coordinates, found " +
                                     std::to_string(toks.size()));
    }
    if (rows_read == count) fail(source_name, line_no, "more points than declared n=" + std::to_string(count));
    for (const auto tok : toks) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        fail(source_name, line_no, "non-numeric token '" + std::string(tok) + "'");
      }
      values.push_back(v);
    }
    ++rows_read;
  }

  if (dim < 0) fail(source_name, line_no, "missing header 'd=<dim> n=<count>'");
  if (rows_read != count) {
    fail(source_name, line_no, "declared n=" + std::to_string(count) + " but found " + std::to_string(rows_read) +
                                   " points");
  }
  return Eigen::Map<const Points>(values.data(), count, dim);
}

Points read_point_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  return parse_point_set(in, path.string());
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_point_set(std::ostream& out, const Points& points) {
  out << "d=" << points.cols() << " n=" << points.rows() << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
      if (k > 0) out << ' ';
      out << format_double(points(i, k));
    }
    out << '\n';
  }
}

void write_point_set(const std::filesystem::path& path, const Points& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  write_point_set(out, points);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace fanning::io
