#include "memjoule/pipeline.hpp"

#include <cmath>

#include "memjoule/errors.hpp"
#include "memjoule/numeric.hpp"

namespace memjoule {

void validate_workload(const QueryWorkload& w) {
  if (w.t_q < 0 || w.t_qn < 0 || w.t_m < 0 || w.k < 0 || w.c < 0 || w.t_a < 0 ||
      (w.t_mg && *w.t_mg < 0) || (w.t_ag && *w.t_ag < 0)) {
    throw Error(ErrorKind::Domain, "workload token counts must be non-negative");
  }
  if (!(w.beta > 0.0) || w.beta > 1.0 || !std::isfinite(w.beta)) {
    throw Error(ErrorKind::Domain, "beta must lie in (0, 1]");
  }
}

void validate_config(const PipelineConfig& c) {
  if (c.retrieval_energy_per_query < 0.0 ||
      c.retrieval_energy_per_memory_token < 0.0 ||
      !std::isfinite(c.retrieval_energy_per_query) ||
      !std::isfinite(c.retrieval_energy_per_memory_token)) {
    throw Error(ErrorKind::Domain, "retrieval energy parameters must be finite and >= 0");
  }
}

TokenCount compressed_tokens(double beta, TokenCount t_m) {
  return static_cast<TokenCount>(std::llround(beta * static_cast<double>(t_m)));
}

double detection_energy(const EnergyModelCoefficients& model,
                        const QueryWorkload& w, WarningLog* warnings) {
  validate_workload(w);
  return predict_energy(model, w.t_q, w.c, warnings);
}

double query_optimization_energy(const EnergyModelCoefficients& model,
                                 const QueryWorkload& w, WarningLog* warnings) {
  validate_workload(w);
  return predict_energy(model, w.t_q, w.t_qn, warnings);
}

double rerank_energy(const EnergyModelCoefficients& model, const QueryWorkload& w,
                     TokenCount effective_query_tokens, WarningLog* warnings) {
  validate_workload(w);
  if (effective_query_tokens < 0) {
    throw Error(ErrorKind::Domain, "effective query tokens must be non-negative");
  }
  return predict_energy(model, effective_query_tokens + w.t_m, w.k, warnings);
}

double compression_energy(const EnergyModelCoefficients& model,
                          const QueryWorkload& w, WarningLog* warnings) {
  validate_workload(w);
  return predict_energy(model, w.t_m, compressed_tokens(w.beta, w.t_m), warnings);
}

double generation_energy(const EnergyModelCoefficients& model,
                         const QueryWorkload& w, WarningLog* warnings) {
  validate_workload(w);
  return predict_energy(model, w.t_q + compressed_tokens(w.beta, w.t_m), w.t_a,
                        warnings);
}

double retrieval_energy(const PipelineConfig& config, const QueryWorkload& w) {
  validate_config(config);
  validate_workload(w);
  return config.retrieval_energy_per_query +
         config.retrieval_energy_per_memory_token * static_cast<double>(w.t_m);
}

EnergyBreakdown simulate_pipeline(const EnergyModelCoefficients& model,
                                  const PipelineConfig& config,
                                  const QueryWorkload& workload,
                                  WarningLog* warnings) {
  validate_workload(workload);
  validate_config(config);

  EnergyBreakdown b;
  b.e_retr = retrieval_energy(config, workload);
  if (config.detection_enabled) {
    b.e1_detection = detection_energy(model, workload, warnings);
  }
  if (config.query_opt_enabled) {
    b.e2_query_opt = query_optimization_energy(model, workload, warnings);
  }
  if (config.rerank_enabled) {
    // A disabled optimizer passes the raw query through to the reranker.
    const TokenCount effective = config.query_opt_enabled ? workload.t_qn : workload.t_q;
    b.e3_rerank = rerank_energy(model, workload, effective, warnings);
  }
  if (config.compression_enabled) {
    b.e4_compression = compression_energy(model, workload, warnings);
    b.e5_generation = generation_energy(model, workload, warnings);
  } else {
    // No compressor: generation sees the full retrieved memory.
    QueryWorkload uncompressed = workload;
    uncompressed.beta = 1.0;
    b.e5_generation = generation_energy(model, uncompressed, warnings);
  }
  b.e_total = b.e_retr + b.e1_detection + b.e2_query_opt + b.e3_rerank +
              b.e4_compression + b.e5_generation;
  return b;
}

double optimal_energy(const EnergyModelCoefficients& model,
                      const PipelineConfig& config, const QueryWorkload& workload,
                      WarningLog* warnings) {
  validate_workload(workload);
  validate_config(config);
  if (!workload.t_mg || !workload.t_ag) {
    throw Error(ErrorKind::Domain,
                "optimal_energy requires ground-truth token counts t_mg and t_ag");
  }
  const double e_retr =
      config.retrieval_energy_per_query +
      config.retrieval_energy_per_memory_token * static_cast<double>(*workload.t_mg);
  return e_retr + predict_energy(model, workload.t_q + *workload.t_mg,
                                 *workload.t_ag, warnings);
}

double geor(double e_optimal, double e_real) {
  if (!(e_real > 0.0)) {
    throw Error(ErrorKind::InvalidDenominator,
                "geor requires e_real > 0, got " + format_double(e_real));
  }
  return e_optimal / e_real;
}

}  // namespace memjoule
