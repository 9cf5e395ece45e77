#pragma once

#include <cstdint>
#include <string>

namespace memjoule {

// Token counts are non-negative integers at every interface; they are
// widened to double only inside energy formulas.
using TokenCount = std::int64_t;

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

// Presentation rounding to `digits` significant digits; digits <= 0 means
// full round-trip precision.
std::string format_double_digits(double value, int digits);

}  // namespace memjoule
