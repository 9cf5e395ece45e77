#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "memjoule/energy_model.hpp"
#include "memjoule/metrics.hpp"
#include "memjoule/pipeline.hpp"
#include "memjoule/sweep.hpp"
#include "memjoule/trace.hpp"
#include "memjoule/warnings.hpp"

namespace memjoule {

// All readers accept LF or CRLF, skip blank lines and #-comment lines, and
// validate the exact header named in the format contract. `source` names
// the input in error messages (a path, or "<stdin>").

// CSV header: t_in,t_out,joules
std::vector<EnergySample> parse_samples_csv(std::istream& in, const std::string& source);
void write_samples_csv(const std::vector<EnergySample>& samples, std::ostream& out);

// JSON object {"model_id", "alpha_in", "alpha_out", "alpha_cross",
// "r_squared": number|null}
EnergyModelCoefficients parse_model_json(const std::string& text, const std::string& source,
                                         WarningLog* warnings = nullptr);
std::string model_to_json(const EnergyModelCoefficients& model);

// Workload: JSON object or single CSV row, fields named exactly
// t_q,t_qn,t_m,k,c,beta,t_a,t_mg,t_ag. Missing optional fields default
// (t_qn := t_q, c := 5; t_mg/t_ag stay absent) and each default is noted.
QueryWorkload parse_workload(const std::string& text, const std::string& source,
                             WarningLog* notes = nullptr);

// JSON object mirroring PipelineConfig field names; every field optional.
PipelineConfig parse_config_json(const std::string& text, const std::string& source,
                                 WarningLog* notes = nullptr);

// CSV header: label,relevance,accuracy,faithfulness,correctness
// (empty cells mean "absent")
struct ScoreRow {
  std::string label;
  EffectivenessScores scores;
};
std::vector<ScoreRow> parse_scores_csv(std::istream& in, const std::string& source);

// CSV header: label,total_energy_j,memory_tokens,writing_time_s,
//             reading_time_s,e_real_j,response_tokens,latency_s
// (empty cells mean "absent"; scores come from the scores file)
std::vector<MetricsInputRow> parse_energies_csv(std::istream& in, const std::string& source);

// CSV header: timestamp_s,power_mw (converted to watts here)
PowerTrace parse_gpu_trace_csv(std::istream& in, const std::string& source);

// CSV header: timestamp_s,energy_uj; wrap range arrives separately.
CumulativeEnergyTrace parse_cpu_trace_csv(std::istream& in, const std::string& source,
                                          double wrap_range_uj);

// Sidecar JSON {"wrap_range_uj": number}
double parse_wrap_range_sidecar(const std::string& text, const std::string& source);

// CSV header: label,start_s,end_s,t_in,t_out
std::vector<InferenceInterval> parse_intervals_csv(std::istream& in, const std::string& source);

// JSON mirroring SweepSpec field names.
SweepSpec parse_sweep_spec_json(const std::string& text, const std::string& source,
                                WarningLog* notes = nullptr);

}  // namespace memjoule
