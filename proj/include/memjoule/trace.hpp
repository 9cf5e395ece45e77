#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memjoule/energy_model.hpp"
#include "memjoule/numeric.hpp"
#include "memjoule/warnings.hpp"

namespace memjoule {

// Instantaneous power readings (GPU-sensor style). Watts internally;
// the file format carries milliwatts.
struct PowerSample {
  double timestamp = 0.0;  // s, arbitrary shared epoch
  double power = 0.0;      // W
};

struct PowerTrace {
  std::vector<PowerSample> samples;
};

// Cumulative energy counter readings (RAPL style). Counters are microjoules
// and wrap at wrap_range_uj.
struct CounterSample {
  double timestamp = 0.0;   // s
  double counter_uj = 0.0;  // uJ, in [0, wrap_range_uj]
};

struct CumulativeEnergyTrace {
  std::vector<CounterSample> samples;
  double wrap_range_uj = 0.0;
};

// Measurement window bound to the token pair it measured.
struct InferenceInterval {
  std::string label;
  double start = 0.0;  // s, same epoch as the traces
  double end = 0.0;
  TokenCount t_in = 0;
  TokenCount t_out = 0;
};

void validate_power_trace(const PowerTrace& trace);
void validate_counter_trace(const CumulativeEnergyTrace& trace);
void validate_interval(const InferenceInterval& interval);

// Trapezoidal integral of power over [start, end], linearly interpolating
// at the boundaries. Endpoints outside the trace by at most one median
// sampling period are clamped to the nearest sample with a warning
// (samplers jitter at the edges); anything further out is a coverage error.
double integrate_power(const PowerTrace& trace, const InferenceInterval& interval,
                       WarningLog* warnings = nullptr);

// Counter delta over [start, end] in joules. Negative inter-sample deltas
// are corrected by adding wrap_range; more than one wrap between adjacent
// samples is undetectable, so any single-step delta above wrap_range/2
// draws a warning. Boundary handling matches integrate_power.
double counter_energy(const CumulativeEnergyTrace& trace,
                      const InferenceInterval& interval,
                      WarningLog* warnings = nullptr);

// max(0, energy - idle_power * interval length); clamping warns. Opt-in:
// fitted coefficients embed idle draw unless callers subtract it here.
double baseline_subtract(double energy, const InferenceInterval& interval,
                         double idle_power, WarningLog* warnings = nullptr);

struct IdlePower {
  std::optional<double> cpu_watts;
  std::optional<double> gpu_watts;
};

// Per interval, sums the energies of every present source (CPU counter
// trace, GPU power trace), baseline-subtracting each source whose idle
// power is given. Emits one EnergySample per interval, in input order.
std::vector<EnergySample> build_samples(const CumulativeEnergyTrace* cpu,
                                        const PowerTrace* gpu,
                                        const std::vector<InferenceInterval>& intervals,
                                        const IdlePower& idle = {},
                                        WarningLog* warnings = nullptr);

}  // namespace memjoule
