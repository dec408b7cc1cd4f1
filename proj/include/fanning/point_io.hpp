#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "fanning/types.hpp"

namespace fanning::io {

/// Malformed or unreadable input; the message carries the path and line number.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text point format:
//
//   d=<dim> n=<count>
//   x_1 ... x_d          one point per line, whitespace separated
//
// `#` starts a comment anywhere on a line; blank lines are ignored. Control points,
// momenta and shape points all use it.

Points parse_point_set(std::istream& in, const std::string& source_name = "<stream>");
Points read_point_set(const std::filesystem::path& path);

/// 17 significant digits, '\n' line endings; identical input gives identical bytes.
void write_point_set(std::ostream& out, const Points& points);
void write_point_set(const std::filesystem::path& path, const Points& points);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

}  // namespace fanning::io
