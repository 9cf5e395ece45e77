#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "memjoule/numeric.hpp"

namespace memjoule {

// Judge / reference scores on the 0-100 scale. A 0-1 mode is deliberately
// not offered: the ratio magnitudes only line up with the published tables
// on the 0-100 scale, and a silent 100x error is worse than a rejection.
struct EffectivenessScores {
  std::optional<double> relevance;
  std::optional<double> accuracy;
  std::optional<double> faithfulness;
  std::optional<double> correctness;
};

// Memory-formation phase totals for one configuration.
struct FormationStats {
  double total_energy = 0.0;  // J
  TokenCount memory_tokens = 0;
  double writing_time = 0.0;  // s
  double reading_time = 0.0;  // s
};

// Generation phase totals for one configuration.
struct GenerationStats {
  double e_real = 0.0;  // J
  TokenCount response_tokens = 0;
  double latency = 0.0;  // s
};

// (GERR, EFR, ECR): generation energy per response token divided by
// Relevance / Faithfulness / Correctness.
struct GenerationMetricTriple {
  double gerr = 0.0;
  double efr = 0.0;
  double ecr = 0.0;
};

void validate_scores(const EffectivenessScores& scores);

double energy_per_memory_token(const FormationStats& stats);
double energy_per_response_token(const GenerationStats& stats);

// (writing seconds per memory token, reading seconds per memory token)
std::pair<double, double> per_token_times(const FormationStats& stats);

double rerr(double e_token_m, double relevance);
double ear(double e_token_m, double accuracy);

GenerationMetricTriple generation_ratios(double e_token_g,
                                         const EffectivenessScores& scores);

// Geometric mean of the variant/baseline ratios of the three generation
// metrics. Latency never enters this multiple; it is reported separately.
double cost_multiple(const GenerationMetricTriple& variant,
                     const GenerationMetricTriple& baseline);

// ---- Report assembly -------------------------------------------------

// One labelled input row: whatever stats are known plus the scores. Absent
// fields are legal and simply yield null metrics downstream.
struct MetricsInputRow {
  std::string label;
  std::optional<double> total_energy_j;
  std::optional<TokenCount> memory_tokens;
  std::optional<double> writing_time_s;
  std::optional<double> reading_time_s;
  std::optional<double> e_real_j;
  std::optional<TokenCount> response_tokens;
  std::optional<double> latency_s;
  EffectivenessScores scores;
};

struct MetricsRow {
  std::string label;
  std::optional<double> rerr;
  std::optional<double> ear;
  std::optional<double> gerr;
  std::optional<double> efr;
  std::optional<double> ecr;
  std::optional<double> e_token_m;
  std::optional<double> e_token_g;
  std::optional<double> latency_per_token;
  std::optional<double> multiple_vs_baseline;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<std::string> warnings;
};

// Computes every ratio the inputs allow, null otherwise. Zero denominators
// produce a null plus a warning, never an error. When baseline_label is set
// it must name an input row whose generation triple is fully computable;
// multiples are then reported against it (1.0 for the baseline itself).
MetricsReport build_metrics_report(const std::vector<MetricsInputRow>& rows,
                                   const std::optional<std::string>& baseline_label);

}  // namespace memjoule
