#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace esm {

// Shortest decimal that round-trips the double; used in CSV reports.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// 17 significant digits: lossless for IEEE doubles; used in model and
// dataset files.
inline std::string fmt_double_17(double v) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace esm
