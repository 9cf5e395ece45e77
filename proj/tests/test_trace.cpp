#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "memjoule/trace.hpp"
#include "test_support.hpp"

using namespace memjoule;
using testsupport::Rng;
using testsupport::thrown_kind;

namespace {

PowerTrace constant_power(double watts, double t0, double t1, double step) {
  PowerTrace trace;
  for (double t = t0; t <= t1 + 1e-12; t += step) trace.samples.push_back({t, watts});
  return trace;
}

InferenceInterval interval(double start, double end, TokenCount t_in = 0,
                           TokenCount t_out = 0) {
  return InferenceInterval{"iv", start, end, t_in, t_out};
}

}  // namespace

TEST_CASE("integrate_power: constant power is P * dt") {
  const auto trace = constant_power(250.0, 0, 4, 1);
  CHECK(integrate_power(trace, interval(0, 4)) == 1000.0);
  CHECK(integrate_power(trace, interval(0.5, 1.5)) == 250.0);
}

TEST_CASE("integrate_power: trapezoid is exact for a linear ramp") {
  PowerTrace ramp;
  for (int t = 0; t <= 10; ++t) ramp.samples.push_back({double(t), 10.0 * t});
  CHECK(integrate_power(ramp, interval(0, 10)) == doctest::Approx(500.0).epsilon(1e-12));
  // partial window: integral of 10t over [2.5, 7.5] = 5*(7.5^2-2.5^2)/... = 250
  CHECK(integrate_power(ramp, interval(2.5, 7.5)) == doctest::Approx(250.0).epsilon(1e-12));
}

TEST_CASE("integrate_power: affine traces integrate exactly") {
  Rng rng(41);
  for (int iter = 0; iter < 100; ++iter) {
    const double offset = rng.uniform(0.0, 200.0);
    const double slope = rng.uniform(0.0, 30.0);
    PowerTrace trace;
    double t = rng.uniform(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
      trace.samples.push_back({t, offset + slope * t});
      t += rng.uniform(0.01, 0.5);
    }
    const double lo = trace.samples.front().timestamp;
    const double hi = trace.samples.back().timestamp;
    const double a = lo + (hi - lo) * rng.uniform(0.0, 0.45);
    const double b = hi - (hi - lo) * rng.uniform(0.0, 0.45);
    const double expected = offset * (b - a) + 0.5 * slope * (b * b - a * a);
    CHECK(integrate_power(trace, interval(a, b)) ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("integrate_power: interval additivity over randomized splits") {
  Rng rng(42);
  PowerTrace trace;
  double t = 0.0;
  for (int i = 0; i < 200; ++i) {
    trace.samples.push_back({t, rng.uniform(0.0, 400.0)});
    t += rng.uniform(0.005, 0.1);
  }
  const double lo = trace.samples.front().timestamp;
  const double hi = trace.samples.back().timestamp;
  for (int iter = 0; iter < 1000; ++iter) {
    double a = rng.uniform(lo, hi);
    double c = rng.uniform(lo, hi);
    if (a > c) std::swap(a, c);
    if (c - a < 1e-6) continue;
    const double b = rng.uniform(a + 1e-9, c);
    const double whole = integrate_power(trace, interval(a, c));
    const double parts = integrate_power(trace, interval(a, b)) +
                         integrate_power(trace, interval(b, c));
    CHECK(whole == doctest::Approx(parts).epsilon(1e-9));
  }
}

TEST_CASE("integrate_power: coverage errors and edge clamping") {
  const auto trace = constant_power(250.0, 0, 4, 1);

  CHECK(thrown_kind([&] { integrate_power(trace, interval(5, 6)); }) ==
        ErrorKind::Coverage);

  // within one median period: clamped with a warning
  WarningLog log;
  CHECK(integrate_power(trace, interval(-0.5, 4.2), &log) == 1000.0);
  CHECK(log.size() == 2);
  CHECK(log.contains("clamped"));

  // beyond one median period: hard error
  CHECK(thrown_kind([&] { integrate_power(trace, interval(-1.5, 4)); }) ==
        ErrorKind::Coverage);

  // clamping both ends to the same edge leaves nothing to integrate
  CHECK(thrown_kind([&] { integrate_power(trace, interval(4.2, 4.9)); }) ==
        ErrorKind::Coverage);

  PowerTrace single;
  single.samples.push_back({0.0, 100.0});
  CHECK(thrown_kind([&] { integrate_power(single, interval(0, 1)); }) ==
        ErrorKind::Coverage);
}

TEST_CASE("counter_energy: direct difference, uJ to J") {
  CumulativeEnergyTrace trace;
  trace.wrap_range_uj = 262144000000.0;
  trace.samples = {{0.0, 1000000.0}, {2.0, 3000000.0}};
  CHECK(counter_energy(trace, interval(0, 2)) == 2.0);
  // interpolated half-window
  CHECK(counter_energy(trace, interval(0, 1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("counter_energy: wraparound is corrected by one wrap range") {
  CumulativeEnergyTrace trace;
  trace.wrap_range_uj = 10000000.0;
  trace.samples = {{0.0, 9500000.0}, {1.0, 500000.0}};
  WarningLog log;
  CHECK(counter_energy(trace, interval(0, 1), &log) == 1.0);
  CHECK(log.empty());  // corrected delta is 1e6 uJ, well under wrap/2
}

TEST_CASE("counter_energy: a step above wrap_range/2 draws a warning") {
  CumulativeEnergyTrace trace;
  trace.wrap_range_uj = 10000000.0;
  trace.samples = {{0.0, 1000000.0}, {1.0, 7000000.0}};
  WarningLog log;
  CHECK(counter_energy(trace, interval(0, 1), &log) == doctest::Approx(6.0));
  CHECK(log.size() == 1);
  CHECK(log.contains("wrap"));
}

TEST_CASE("counter_energy: zero-length effective overlap is a coverage error") {
  CumulativeEnergyTrace trace;
  trace.wrap_range_uj = 1e9;
  trace.samples = {{0.0, 0.0}, {2.0, 1000.0}, {4.0, 2000.0}};
  CHECK(thrown_kind([&] { counter_energy(trace, interval(4.5, 5.5)); }) ==
        ErrorKind::Coverage);
}

TEST_CASE("counter_energy: invariant under constant counter offsets") {
  Rng rng(43);
  const double wrap = 1e7;
  for (int iter = 0; iter < 100; ++iter) {
    CumulativeEnergyTrace trace;
    trace.wrap_range_uj = wrap;
    double t = 0.0;
    double level = rng.uniform(0.0, wrap);
    std::vector<double> raw;
    for (int i = 0; i < 30; ++i) {
      trace.samples.push_back({t, std::fmod(level, wrap)});
      raw.push_back(level);
      t += rng.uniform(0.1, 1.0);
      level += rng.uniform(0.0, wrap / 4.0);
    }
    const double offset = rng.uniform(0.0, wrap);
    CumulativeEnergyTrace shifted = trace;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      shifted.samples[i].counter_uj = std::fmod(raw[i] + offset, wrap);
    }
    const auto iv = interval(1.0, t - 1.0);
    CHECK(counter_energy(shifted, iv) ==
          doctest::Approx(counter_energy(trace, iv)).epsilon(1e-9));
  }
}

TEST_CASE("counter trace validation") {
  CumulativeEnergyTrace bad;
  bad.wrap_range_uj = 0.0;
  bad.samples = {{0.0, 0.0}, {1.0, 1.0}};
  CHECK(thrown_kind([&] { counter_energy(bad, interval(0, 1)); }) == ErrorKind::Domain);

  CumulativeEnergyTrace out_of_range;
  out_of_range.wrap_range_uj = 10.0;
  out_of_range.samples = {{0.0, 5.0}, {1.0, 15.0}};
  CHECK(thrown_kind([&] { counter_energy(out_of_range, interval(0, 1)); }) ==
        ErrorKind::Domain);
}

TEST_CASE("baseline_subtract clamps at zero with a warning") {
  CHECK(baseline_subtract(1000.0, interval(0, 4), 50.0) == 800.0);
  CHECK(baseline_subtract(123.456, interval(0, 4), 0.0) == 123.456);

  WarningLog log;
  CHECK(baseline_subtract(100.0, interval(0, 10), 50.0, &log) == 0.0);
  CHECK(log.size() == 1);
  CHECK(log.contains("clamped"));

  CHECK(thrown_kind([&] { baseline_subtract(1.0, interval(0, 1), -1.0); }) ==
        ErrorKind::Domain);
}

TEST_CASE("build_samples: single source equals the underlying integral") {
  CumulativeEnergyTrace cpu;
  cpu.wrap_range_uj = 1e9;
  cpu.samples = {{0.0, 1000000.0}, {2.0, 3000000.0}};
  const std::vector<InferenceInterval> ivs = {{"q1", 0.0, 2.0, 100, 1}};
  const auto samples = build_samples(&cpu, nullptr, ivs);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].t_in == 100);
  CHECK(samples[0].t_out == 1);
  CHECK(samples[0].energy == counter_energy(cpu, ivs[0]));
}

TEST_CASE("build_samples: sources add up") {
  CumulativeEnergyTrace cpu;
  cpu.wrap_range_uj = 1e9;
  cpu.samples = {{0.0, 0.0}, {4.0, 2000000.0}};  // 2 J
  const auto gpu = constant_power(250.0, 0, 4, 1);  // 1000 J over [0,4]
  const std::vector<InferenceInterval> ivs = {{"q1", 0.0, 4.0, 10, 2}};
  const auto samples = build_samples(&cpu, &gpu, ivs);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].energy == doctest::Approx(1002.0).epsilon(1e-12));
}

TEST_CASE("build_samples: idle subtraction is per source") {
  const auto gpu = constant_power(250.0, 0, 4, 1);
  const std::vector<InferenceInterval> ivs = {{"q1", 0.0, 4.0, 10, 2}};
  IdlePower idle;
  idle.gpu_watts = 50.0;
  const auto samples = build_samples(nullptr, &gpu, ivs, idle);
  CHECK(samples[0].energy == doctest::Approx(800.0).epsilon(1e-12));
}

TEST_CASE("build_samples: empty interval list and missing traces") {
  const auto gpu = constant_power(250.0, 0, 4, 1);
  CHECK(build_samples(nullptr, &gpu, {}).empty());
  CHECK(thrown_kind([&] { build_samples(nullptr, nullptr, {}); }) == ErrorKind::Domain);
}

TEST_CASE("build_samples: coverage errors name interval and source") {
  const auto gpu = constant_power(250.0, 0, 4, 1);
  const std::vector<InferenceInterval> ivs = {{"q7", 10.0, 12.0, 1, 1}};
  try {
    build_samples(nullptr, &gpu, ivs);
    FAIL("expected a coverage error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Coverage);
    const std::string msg = e.what();
    CHECK(msg.find("q7") != std::string::npos);
    CHECK(msg.find("gpu") != std::string::npos);
  }
}

TEST_CASE("build_samples: output preserves order and non-negativity") {
  Rng rng(44);
  PowerTrace gpu;
  double t = 0.0;
  for (int i = 0; i < 100; ++i) {
    gpu.samples.push_back({t, rng.uniform(0.0, 300.0)});
    t += rng.uniform(0.01, 0.2);
  }
  std::vector<InferenceInterval> ivs;
  const double hi = gpu.samples.back().timestamp;
  for (int i = 0; i < 20; ++i) {
    double a = rng.uniform(0.0, hi * 0.9);
    double b = a + rng.uniform(1e-3, hi - a);
    ivs.push_back({"iv" + std::to_string(i), a, std::min(b, hi),
                   rng.uniform_int(0, 100), rng.uniform_int(0, 100)});
  }
  const auto samples = build_samples(nullptr, &gpu, ivs);
  REQUIRE(samples.size() == ivs.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].t_in == ivs[i].t_in);
    CHECK(samples[i].energy >= 0.0);
  }
}

TEST_CASE("interval validation") {
  CHECK(thrown_kind([] { validate_interval({"x", 2.0, 1.0, 0, 0}); }) ==
        ErrorKind::Domain);
  CHECK(thrown_kind([] { validate_interval({"x", 0.0, 1.0, -1, 0}); }) ==
        ErrorKind::Domain);
}
