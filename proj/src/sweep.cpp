#include "memjoule/sweep.hpp"

#include <cmath>

#include "memjoule/errors.hpp"
#include "memjoule/numeric.hpp"

namespace memjoule {

const char* sweep_parameter_name(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::TopK: return "top_k";
    case SweepParameter::Beta: return "beta";
    case SweepParameter::MemoryTokens: return "memory_tokens";
    case SweepParameter::QueryTokens: return "query_tokens";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "top_k") return SweepParameter::TopK;
  if (name == "beta") return SweepParameter::Beta;
  if (name == "memory_tokens") return SweepParameter::MemoryTokens;
  if (name == "query_tokens") return SweepParameter::QueryTokens;
  throw Error(ErrorKind::Parse,
              "unknown sweep parameter '" + name +
                  "' (expected top_k, beta, memory_tokens or query_tokens)");
}

namespace {

TokenCount require_token_value(double v, const char* parameter) {
  if (!(v >= 0.0) || std::floor(v) != v || !std::isfinite(v)) {
    throw Error(ErrorKind::Domain,
                std::string(parameter) + " sweep values must be non-negative integers, got " +
                    format_double(v));
  }
  return static_cast<TokenCount>(v);
}

QueryWorkload workload_at(const SweepSpec& spec, double value) {
  QueryWorkload w = spec.base_workload;
  switch (spec.parameter) {
    case SweepParameter::TopK: {
      const TokenCount k = require_token_value(value, "top_k");
      const auto node = static_cast<TokenCount>(std::llround(spec.node_size_tokens));
      if (node < 0) {
        throw Error(ErrorKind::Domain, "node_size_tokens must be >= 0 for top_k sweeps");
      }
      w.k = k;
      w.t_m = k * node;
      break;
    }
    case SweepParameter::Beta:
      if (!(value > 0.0) || value > 1.0) {
        throw Error(ErrorKind::Domain,
                    "beta sweep values must lie in (0, 1], got " + format_double(value));
      }
      w.beta = value;
      break;
    case SweepParameter::MemoryTokens:
      w.t_m = require_token_value(value, "memory_tokens");
      break;
    case SweepParameter::QueryTokens:
      w.t_q = require_token_value(value, "query_tokens");
      break;
  }
  return w;
}

}  // namespace

void validate_sweep_spec(const SweepSpec& spec) {
  if (spec.values.empty()) {
    throw Error(ErrorKind::Domain, "sweep values must be non-empty");
  }
  validate_workload(spec.base_workload);
  validate_config(spec.variant_config);
  validate_config(spec.baseline_config);
  for (double v : spec.values) workload_at(spec, v);  // range-checks each value
}

std::vector<SweepRow> run_sweep(const EnergyModelCoefficients& model,
                                const SweepSpec& spec, WarningLog* warnings) {
  validate_sweep_spec(spec);
  std::vector<SweepRow> rows;
  rows.reserve(spec.values.size());
  for (double value : spec.values) {
    try {
      SweepRow row;
      row.parameter_value = value;
      const QueryWorkload w = workload_at(spec, value);
      row.variant = simulate_pipeline(model, spec.variant_config, w, warnings);
      row.baseline = simulate_pipeline(model, spec.baseline_config, w, warnings);
      if (!(row.baseline.e_total > 0.0)) {
        throw Error(ErrorKind::InvalidDenominator,
                    "baseline pipeline energy is not positive");
      }
      row.energy_multiple = row.variant.e_total / row.baseline.e_total;
      rows.push_back(row);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("sweep value ") + format_double(value) +
                                " (" + sweep_parameter_name(spec.parameter) +
                                "): " + e.what());
    }
  }
  return rows;
}

}  // namespace memjoule
