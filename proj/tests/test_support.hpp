#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include <doctest.h>

#include "memjoule/energy_model.hpp"
#include "memjoule/errors.hpp"

namespace testsupport {

// splitmix64-based generator: fully specified, identical on every platform,
// unlike the std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  double normal() {  // Box-Muller
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }

 private:
  std::uint64_t state_;
};

inline memjoule::EnergyModelCoefficients paper_model() {
  memjoule::EnergyModelCoefficients m;
  m.model_id = "llama31_8b_int8";
  m.alpha_in = 0.042933;
  m.alpha_out = 9.109322;
  m.alpha_cross = 0.000513;
  return m;
}

template <typename Fn>
memjoule::ErrorKind thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const memjoule::Error& e) {
    return e.kind();
  }
  FAIL("expected a memjoule::Error to be thrown");
  return memjoule::ErrorKind::Io;  // unreachable
}

}  // namespace testsupport
