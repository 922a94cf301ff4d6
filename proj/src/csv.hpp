#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace autost::csv {

/// Line-oriented reader for the simple comma-separated files used here
/// (no quoting). Errors carry "file:line".
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  /// Next non-empty line split on ','; false at end of file.
  bool next(std::vector<std::string>& fields);
  std::size_t line() const noexcept { return line_; }
  std::string where() const;

  /// Reads the header row and checks it against `expected` exactly.
  void expect_header(const std::vector<std::string>& expected);

  std::int64_t to_int(const std::string& field) const;
  double to_double(const std::string& field) const;
  /// Throws ParseError with the position prefixed.
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(const std::string& line, char sep = ',');

/// Shortest round-trip representation of a double.
std::string format_double(double v);

}  // namespace autost::csv
