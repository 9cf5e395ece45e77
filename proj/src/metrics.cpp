#include "memjoule/metrics.hpp"

#include <cmath>

#include "memjoule/errors.hpp"
#include "memjoule/numeric.hpp"

namespace memjoule {

namespace {

void check_score_range(const std::optional<double>& score, const char* name) {
  if (score && !(*score >= 0.0 && *score <= 100.0)) {
    throw Error(ErrorKind::Domain,
                std::string(name) + " score must lie in [0, 100], got " +
                    format_double(*score));
  }
}

double require_positive_score(const std::optional<double>& score, const char* name) {
  if (!score) {
    throw Error(ErrorKind::InvalidDenominator,
                std::string(name) + " score is absent");
  }
  if (!(*score > 0.0)) {
    throw Error(ErrorKind::InvalidDenominator,
                std::string(name) + " score must be > 0, got " + format_double(*score));
  }
  return *score;
}

}  // namespace

void validate_scores(const EffectivenessScores& s) {
  check_score_range(s.relevance, "relevance");
  check_score_range(s.accuracy, "accuracy");
  check_score_range(s.faithfulness, "faithfulness");
  check_score_range(s.correctness, "correctness");
}

double energy_per_memory_token(const FormationStats& stats) {
  if (stats.memory_tokens <= 0) {
    throw Error(ErrorKind::InvalidDenominator,
                "memory_tokens must be > 0 to compute energy per memory token");
  }
  return stats.total_energy / static_cast<double>(stats.memory_tokens);
}

double energy_per_response_token(const GenerationStats& stats) {
  if (stats.response_tokens <= 0) {
    throw Error(ErrorKind::InvalidDenominator,
                "response_tokens must be > 0 to compute energy per response token");
  }
  return stats.e_real / static_cast<double>(stats.response_tokens);
}

std::pair<double, double> per_token_times(const FormationStats& stats) {
  if (stats.memory_tokens <= 0) {
    throw Error(ErrorKind::InvalidDenominator,
                "memory_tokens must be > 0 to compute per-token times");
  }
  const double tokens = static_cast<double>(stats.memory_tokens);
  return {stats.writing_time / tokens, stats.reading_time / tokens};
}

double rerr(double e_token_m, double relevance) {
  if (!(relevance > 0.0)) {
    throw Error(ErrorKind::InvalidDenominator,
                "relevance score must be > 0, got " + format_double(relevance));
  }
  return e_token_m / relevance;
}

double ear(double e_token_m, double accuracy) {
  if (!(accuracy > 0.0)) {
    throw Error(ErrorKind::InvalidDenominator,
                "accuracy score must be > 0, got " + format_double(accuracy));
  }
  return e_token_m / accuracy;
}

GenerationMetricTriple generation_ratios(double e_token_g,
                                         const EffectivenessScores& scores) {
  validate_scores(scores);
  GenerationMetricTriple t;
  t.gerr = e_token_g / require_positive_score(scores.relevance, "relevance");
  t.efr = e_token_g / require_positive_score(scores.faithfulness, "faithfulness");
  t.ecr = e_token_g / require_positive_score(scores.correctness, "correctness");
  return t;
}

double cost_multiple(const GenerationMetricTriple& variant,
                     const GenerationMetricTriple& baseline) {
  const double values[6] = {variant.gerr, variant.efr,  variant.ecr,
                            baseline.gerr, baseline.efr, baseline.ecr};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidDenominator,
                  "cost_multiple requires all six ratios to be > 0");
    }
  }
  return std::cbrt((variant.gerr / baseline.gerr) * (variant.efr / baseline.efr) *
                   (variant.ecr / baseline.ecr));
}

namespace {

struct RowComputation {
  MetricsRow out;
  std::optional<GenerationMetricTriple> triple;
};

RowComputation compute_row(const MetricsInputRow& in,
                           std::vector<std::string>& warnings) {
  validate_scores(in.scores);
  RowComputation rc;
  rc.out.label = in.label;

  const bool has_formation = in.total_energy_j && in.memory_tokens;
  if (has_formation) {
    FormationStats f;
    f.total_energy = *in.total_energy_j;
    f.memory_tokens = *in.memory_tokens;
    if (f.memory_tokens <= 0) {
      warnings.push_back(in.label + ": memory_tokens is not positive; formation metrics omitted");
    } else {
      rc.out.e_token_m = energy_per_memory_token(f);
      if (in.scores.relevance) {
        if (*in.scores.relevance > 0.0) {
          rc.out.rerr = rerr(*rc.out.e_token_m, *in.scores.relevance);
        } else {
          warnings.push_back(in.label + ": relevance score is 0; rerr omitted");
        }
      }
      if (in.scores.accuracy) {
        if (*in.scores.accuracy > 0.0) {
          rc.out.ear = ear(*rc.out.e_token_m, *in.scores.accuracy);
        } else {
          warnings.push_back(in.label + ": accuracy score is 0; ear omitted");
        }
      }
    }
  }

  const bool has_generation = in.e_real_j && in.response_tokens;
  if (has_generation) {
    GenerationStats g;
    g.e_real = *in.e_real_j;
    g.response_tokens = *in.response_tokens;
    g.latency = in.latency_s.value_or(0.0);
    if (g.response_tokens <= 0) {
      warnings.push_back(in.label + ": response_tokens is not positive; generation metrics omitted");
    } else {
      rc.out.e_token_g = energy_per_response_token(g);
      if (in.latency_s) {
        rc.out.latency_per_token = g.latency / static_cast<double>(g.response_tokens);
      }
      bool zero_score = false;
      for (const auto& [score, name] :
           {std::pair{in.scores.relevance, "relevance"},
            std::pair{in.scores.faithfulness, "faithfulness"},
            std::pair{in.scores.correctness, "correctness"}}) {
        if (score && !(*score > 0.0)) {
          warnings.push_back(in.label + ": " + name + " score is 0; generation ratios omitted");
          zero_score = true;
        }
      }
      if (!zero_score && in.scores.relevance && in.scores.faithfulness &&
          in.scores.correctness) {
        rc.triple = generation_ratios(*rc.out.e_token_g, in.scores);
        rc.out.gerr = rc.triple->gerr;
        rc.out.efr = rc.triple->efr;
        rc.out.ecr = rc.triple->ecr;
      }
    }
  }
  return rc;
}

}  // namespace

MetricsReport build_metrics_report(const std::vector<MetricsInputRow>& rows,
                                   const std::optional<std::string>& baseline_label) {
  MetricsReport report;
  std::vector<std::optional<GenerationMetricTriple>> triples;
  triples.reserve(rows.size());

  for (const auto& in : rows) {
    auto rc = compute_row(in, report.warnings);
    triples.push_back(rc.triple);
    report.rows.push_back(std::move(rc.out));
  }

  if (baseline_label) {
    std::optional<GenerationMetricTriple> base;
    bool found = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].label == *baseline_label) {
        found = true;
        base = triples[i];
        break;
      }
    }
    if (!found) {
      throw Error(ErrorKind::Parse,
                  "baseline label '" + *baseline_label + "' not found among input rows");
    }
    if (!base) {
      report.warnings.push_back("baseline '" + *baseline_label +
                                "' has no computable generation triple; multiples omitted");
    } else {
      for (std::size_t i = 0; i < report.rows.size(); ++i) {
        if (!triples[i]) continue;
        report.rows[i].multiple_vs_baseline = cost_multiple(*triples[i], *base);
      }
    }
  }
  return report;
}

}  // namespace memjoule
