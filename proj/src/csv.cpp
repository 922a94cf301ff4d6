#include "csv.hpp"

#include <charconv>
#include <cstdio>

#include "autost/errors.hpp"

namespace autost::csv {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Reader::Reader(const std::filesystem::path& path) : path_(path), in_(path) {
  if (!in_) throw IoError("cannot open " + path.string());
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (trim(raw).empty()) continue;
    fields = split(raw);
    return true;
  }
  return false;
}

std::string Reader::where() const { return path_.string() + ":" + std::to_string(line_); }

void Reader::fail(const std::string& message) const { throw ParseError(where() + ": " + message); }

void Reader::expect_header(const std::vector<std::string>& expected) {
  std::vector<std::string> fields;
  if (!next(fields)) fail("missing header");
  if (fields != expected) {
    std::string want;
    for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
    fail("unexpected header, expected '" + want + "'");
  }
}

std::int64_t Reader::to_int(const std::string& field) const {
  std::int64_t v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) fail("expected integer, got '" + field + "'");
  return v;
}

double Reader::to_double(const std::string& field) const {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) fail("expected number, got '" + field + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace autost::csv
