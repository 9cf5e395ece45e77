#pragma once

#include <string>
#include <vector>

#include "memjoule/pipeline.hpp"
#include "memjoule/warnings.hpp"

namespace memjoule {

enum class SweepParameter { TopK, Beta, MemoryTokens, QueryTokens };

const char* sweep_parameter_name(SweepParameter parameter);
SweepParameter parse_sweep_parameter(const std::string& name);

// One swept dimension over a base workload, evaluated under a variant and a
// baseline configuration. For top_k sweeps, t_m is rewritten to
// k * round(node_size_tokens); stored node sizes may be fractional averages
// but token counts are integral.
struct SweepSpec {
  SweepParameter parameter = SweepParameter::TopK;
  std::vector<double> values;
  double node_size_tokens = 0.0;
  QueryWorkload base_workload;
  PipelineConfig variant_config;
  PipelineConfig baseline_config;
};

struct SweepRow {
  double parameter_value = 0.0;
  EnergyBreakdown variant;
  EnergyBreakdown baseline;
  double energy_multiple = 0.0;  // variant e_total / baseline e_total
};

void validate_sweep_spec(const SweepSpec& spec);

// One row per value, in spec order. Errors are annotated with the offending
// parameter value.
std::vector<SweepRow> run_sweep(const EnergyModelCoefficients& model,
                                const SweepSpec& spec,
                                WarningLog* warnings = nullptr);

}  // namespace memjoule
