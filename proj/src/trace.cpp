#include "memjoule/trace.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "memjoule/errors.hpp"
#include "memjoule/numeric.hpp"

namespace memjoule {

namespace {

std::string interval_name(const InferenceInterval& iv) {
  return "interval '" + (iv.label.empty() ? std::string("?") : iv.label) + "' [" +
         format_double(iv.start) + ", " + format_double(iv.end) + "]";
}

void check_timestamps(const std::vector<double>& ts, const char* what) {
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i] > ts[i - 1])) {
      throw Error(ErrorKind::Domain,
                  std::string(what) + " timestamps must be strictly increasing");
    }
  }
}

double median_period(const std::vector<double>& ts) {
  std::vector<double> gaps;
  gaps.reserve(ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i) gaps.push_back(ts[i] - ts[i - 1]);
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  if (gaps.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(gaps.begin(), mid);
  return 0.5 * (lower + upper);
}

// Clamps one interval endpoint into trace coverage. Jitter of up to one
// median sampling period is tolerated with a warning; more is a hard error.
double resolve_endpoint(double t, double lo, double hi, double tolerance,
                        const char* which, const InferenceInterval& iv,
                        const char* source, WarningLog* warnings) {
  if (t >= lo && t <= hi) return t;
  const double overshoot = t < lo ? lo - t : t - hi;
  if (overshoot <= tolerance) {
    const double clamped = t < lo ? lo : hi;
    warn(warnings, interval_name(iv) + ": " + which + " endpoint " +
                       format_double(t) + " clamped to " + source +
                       " trace edge " + format_double(clamped));
    return clamped;
  }
  throw Error(ErrorKind::Coverage,
              interval_name(iv) + " not covered by " + source + " trace [" +
                  format_double(lo) + ", " + format_double(hi) + "]");
}

struct EffectiveWindow {
  double start;
  double end;
};

EffectiveWindow resolve_window(const std::vector<double>& ts,
                               const InferenceInterval& iv, const char* source,
                               WarningLog* warnings) {
  validate_interval(iv);
  if (ts.size() < 2) {
    throw Error(ErrorKind::Coverage,
                std::string(source) + " trace has fewer than 2 samples; cannot cover " +
                    interval_name(iv));
  }
  const double lo = ts.front();
  const double hi = ts.back();
  const double tol = median_period(ts);
  EffectiveWindow w;
  w.start = resolve_endpoint(iv.start, lo, hi, tol, "start", iv, source, warnings);
  w.end = resolve_endpoint(iv.end, lo, hi, tol, "end", iv, source, warnings);
  if (!(w.start < w.end)) {
    throw Error(ErrorKind::Coverage,
                interval_name(iv) + " has zero-length effective overlap with " +
                    source + " trace");
  }
  return w;
}

// Piecewise-linear interpolation of (ts, vs) at t, t within [front, back].
double interpolate(const std::vector<double>& ts, const std::vector<double>& vs,
                   double t) {
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.begin()) return vs.front();
  const auto i = static_cast<std::size_t>(it - ts.begin());
  if (it == ts.end()) return vs.back();
  if (*it == t) return vs[i];
  const double t0 = ts[i - 1], t1 = ts[i];
  const double v0 = vs[i - 1], v1 = vs[i];
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

// Trapezoidal integral of the interpolant over [a, b].
double integrate_linear(const std::vector<double>& ts, const std::vector<double>& vs,
                        double a, double b) {
  double total = 0.0;
  double prev_t = a;
  double prev_v = interpolate(ts, vs, a);
  auto it = std::upper_bound(ts.begin(), ts.end(), a);
  for (; it != ts.end() && *it < b; ++it) {
    const auto i = static_cast<std::size_t>(it - ts.begin());
    total += 0.5 * (prev_v + vs[i]) * (*it - prev_t);
    prev_t = *it;
    prev_v = vs[i];
  }
  total += 0.5 * (prev_v + interpolate(ts, vs, b)) * (b - prev_t);
  return total;
}

}  // namespace

void validate_power_trace(const PowerTrace& trace) {
  std::vector<double> ts;
  ts.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    if (!(s.power >= 0.0) || !std::isfinite(s.power)) {
      throw Error(ErrorKind::Domain, "power samples must be finite and >= 0");
    }
    ts.push_back(s.timestamp);
  }
  check_timestamps(ts, "power trace");
}

void validate_counter_trace(const CumulativeEnergyTrace& trace) {
  if (!(trace.wrap_range_uj > 0.0)) {
    throw Error(ErrorKind::Domain, "wrap_range_uj must be > 0");
  }
  std::vector<double> ts;
  ts.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    if (!(s.counter_uj >= 0.0) || s.counter_uj > trace.wrap_range_uj) {
      throw Error(ErrorKind::Domain,
                  "counter values must lie in [0, wrap_range_uj]");
    }
    ts.push_back(s.timestamp);
  }
  check_timestamps(ts, "energy counter");
}

void validate_interval(const InferenceInterval& interval) {
  if (!(interval.start < interval.end)) {
    throw Error(ErrorKind::Domain,
                interval_name(interval) + " must satisfy start < end");
  }
  if (interval.t_in < 0 || interval.t_out < 0) {
    throw Error(ErrorKind::Domain,
                interval_name(interval) + " token counts must be non-negative");
  }
}

double integrate_power(const PowerTrace& trace, const InferenceInterval& interval,
                       WarningLog* warnings) {
  validate_power_trace(trace);
  std::vector<double> ts, ps;
  ts.reserve(trace.samples.size());
  ps.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    ts.push_back(s.timestamp);
    ps.push_back(s.power);
  }
  const auto w = resolve_window(ts, interval, "gpu power", warnings);
  return integrate_linear(ts, ps, w.start, w.end);
}

double counter_energy(const CumulativeEnergyTrace& trace,
                      const InferenceInterval& interval, WarningLog* warnings) {
  validate_counter_trace(trace);
  const double wrap = trace.wrap_range_uj;

  std::vector<double> ts, unwrapped;
  ts.reserve(trace.samples.size());
  unwrapped.reserve(trace.samples.size());
  double level = trace.samples.empty() ? 0.0 : trace.samples.front().counter_uj;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    if (i > 0) {
      double delta = trace.samples[i].counter_uj - trace.samples[i - 1].counter_uj;
      if (delta < 0.0) delta += wrap;  // one wraparound between samples
      if (delta > wrap / 2.0) {
        warn(warnings,
             "counter step at t=" + format_double(trace.samples[i].timestamp) +
                 " consumes " + format_double(delta) +
                 " uJ (> wrap_range/2); multiple wraps in one step are undetectable");
      }
      level += delta;
    }
    ts.push_back(trace.samples[i].timestamp);
    unwrapped.push_back(level);
  }

  const auto w = resolve_window(ts, interval, "cpu energy", warnings);
  const double start_uj = interpolate(ts, unwrapped, w.start);
  const double end_uj = interpolate(ts, unwrapped, w.end);
  return (end_uj - start_uj) * 1e-6;
}

double baseline_subtract(double energy, const InferenceInterval& interval,
                         double idle_power, WarningLog* warnings) {
  validate_interval(interval);
  if (idle_power < 0.0 || !std::isfinite(idle_power)) {
    throw Error(ErrorKind::Domain, "idle power must be finite and >= 0");
  }
  const double corrected = energy - idle_power * (interval.end - interval.start);
  if (corrected < 0.0) {
    warn(warnings, interval_name(interval) + ": baseline subtraction drove energy to " +
                       format_double(corrected) + " J; clamped to 0");
    return 0.0;
  }
  return corrected;
}

std::vector<EnergySample> build_samples(const CumulativeEnergyTrace* cpu,
                                        const PowerTrace* gpu,
                                        const std::vector<InferenceInterval>& intervals,
                                        const IdlePower& idle, WarningLog* warnings) {
  if (cpu == nullptr && gpu == nullptr) {
    throw Error(ErrorKind::Domain, "build_samples needs at least one trace");
  }
  std::vector<EnergySample> out;
  out.reserve(intervals.size());
  for (const auto& iv : intervals) {
    double energy = 0.0;
    if (cpu != nullptr) {
      double e = counter_energy(*cpu, iv, warnings);
      if (idle.cpu_watts) e = baseline_subtract(e, iv, *idle.cpu_watts, warnings);
      energy += e;
    }
    if (gpu != nullptr) {
      double e = integrate_power(*gpu, iv, warnings);
      if (idle.gpu_watts) e = baseline_subtract(e, iv, *idle.gpu_watts, warnings);
      energy += e;
    }
    out.push_back(EnergySample{iv.t_in, iv.t_out, energy});
  }
  return out;
}

}  // namespace memjoule
