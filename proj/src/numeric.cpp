#include "memjoule/numeric.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

namespace memjoule {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_double_digits(double value, int digits) {
  if (digits <= 0) return format_double(value);
  if (!std::isfinite(value)) return format_double(value);
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::string(buf, buf + n);
}

}  // namespace memjoule
