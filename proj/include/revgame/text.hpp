#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Small parsing/formatting helpers shared by the file formats. All numeric
// output is locale-independent; doubles render via shortest round-trip form.

namespace revgame::text {

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("failed to format double");
  return std::string(buf, p);
}

// Fixed-point rendering, e.g. fixed(0.227333, 4) == "0.2273".
inline std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return std::string(buf);
}

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, const char* what) {
  s = trim(s);
  T value{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument(std::string("cannot parse ") + what + ": \"" +
                                std::string(s) + "\"");
  return value;
}

inline double parse_double(std::string_view s, const char* what = "number") {
  return parse_number<double>(s, what);
}
inline long parse_long(std::string_view s, const char* what = "integer") {
  return parse_number<long>(s, what);
}
inline int parse_int(std::string_view s, const char* what = "integer") {
  return parse_number<int>(s, what);
}
inline std::uint64_t parse_u64(std::string_view s, const char* what = "integer") {
  return parse_number<std::uint64_t>(s, what);
}

}  // namespace revgame::text
