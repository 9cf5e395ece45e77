#pragma once

#include <optional>

#include "memjoule/energy_model.hpp"
#include "memjoule/numeric.hpp"
#include "memjoule/warnings.hpp"

namespace memjoule {

// Token counts for one query's trip through the memory pipeline.
// t_mg/t_ag (ground-truth memory and answer tokens) are only needed for the
// optimal-case baseline and may be absent.
struct QueryWorkload {
  TokenCount t_q = 0;   // query tokens
  TokenCount t_qn = 0;  // optimized-query tokens
  TokenCount t_m = 0;   // retrieved memory tokens across the top-k entries
  TokenCount k = 0;     // number of retrieved entries
  TokenCount c = 5;     // detection output tokens (a small constant)
  double beta = 1.0;    // compression ratio, (0, 1]
  TokenCount t_a = 0;   // answer tokens
  std::optional<TokenCount> t_mg;
  std::optional<TokenCount> t_ag;
};

struct PipelineConfig {
  bool detection_enabled = true;
  bool query_opt_enabled = true;
  bool rerank_enabled = true;
  bool compression_enabled = true;
  double retrieval_energy_per_query = 0.0;        // J
  double retrieval_energy_per_memory_token = 0.0; // J per retrieved token
};

// Per-stage joules; disabled stages hold exactly 0. e_total is the sum in
// the fixed order e_retr, e1, e2, e3, e4, e5.
struct EnergyBreakdown {
  double e_retr = 0.0;
  double e1_detection = 0.0;
  double e2_query_opt = 0.0;
  double e3_rerank = 0.0;
  double e4_compression = 0.0;
  double e5_generation = 0.0;
  double e_total = 0.0;
};

void validate_workload(const QueryWorkload& workload);
void validate_config(const PipelineConfig& config);

// Compressed-memory token count: beta*t_m rounded to nearest, ties away
// from zero. Token counts are integral, so rounding happens before the
// model is evaluated.
TokenCount compressed_tokens(double beta, TokenCount t_m);

// Stage energies. Each one is a single model evaluation; disabled-stage
// substitutions are simulate_pipeline's job, not theirs.
double detection_energy(const EnergyModelCoefficients& model,
                        const QueryWorkload& workload,
                        WarningLog* warnings = nullptr);
double query_optimization_energy(const EnergyModelCoefficients& model,
                                 const QueryWorkload& workload,
                                 WarningLog* warnings = nullptr);
double rerank_energy(const EnergyModelCoefficients& model,
                     const QueryWorkload& workload,
                     TokenCount effective_query_tokens,
                     WarningLog* warnings = nullptr);
double compression_energy(const EnergyModelCoefficients& model,
                          const QueryWorkload& workload,
                          WarningLog* warnings = nullptr);
double generation_energy(const EnergyModelCoefficients& model,
                         const QueryWorkload& workload,
                         WarningLog* warnings = nullptr);
double retrieval_energy(const PipelineConfig& config,
                        const QueryWorkload& workload);

// Full pipeline pass. Substitution rules when a stage is disabled: reranking
// sees t_q instead of t_qn when query optimization is off, and generation
// sees beta = 1 when compression is off.
EnergyBreakdown simulate_pipeline(const EnergyModelCoefficients& model,
                                  const PipelineConfig& config,
                                  const QueryWorkload& workload,
                                  WarningLog* warnings = nullptr);

// Theoretical minimum: retrieval of exactly the ground-truth memories plus
// one generation. Retrieval cost is evaluated at t_m := t_mg. Requires
// t_mg and t_ag.
double optimal_energy(const EnergyModelCoefficients& model,
                      const PipelineConfig& config,
                      const QueryWorkload& workload,
                      WarningLog* warnings = nullptr);

// Generation Energy Optimality Ratio: e_optimal / e_real.
double geor(double e_optimal, double e_real);

}  // namespace memjoule
