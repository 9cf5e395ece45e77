#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "memjoule/metrics.hpp"
#include "memjoule/pipeline.hpp"
#include "memjoule/sweep.hpp"

namespace memjoule {

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& name);

// Optional deterministic-output metadata; when absent (--no-meta) reruns
// are byte-identical.
struct ReportMeta {
  bool enabled = false;
  std::string generated_utc;
};

ReportMeta make_report_meta();

// Fixed column order:
//   param,e_retr_v,e1_v,e2_v,e3_v,e4_v,e5_v,e_total_v,
//         e_retr_b,e1_b,e2_b,e3_b,e4_b,e5_b,e_total_b,multiple
// Numbers are serialized round-trip exact; identical inputs yield
// byte-identical output.
void emit_sweep_report(const std::vector<SweepRow>& rows, ReportFormat format,
                       std::ostream& out, const ReportMeta& meta = {});

// Inverse of the JSON encoding above (used for round-trip checks and by
// downstream tooling).
std::vector<SweepRow> parse_sweep_report_json(const std::string& text);

void emit_metrics_report(const MetricsReport& report, ReportFormat format,
                         std::ostream& out, const ReportMeta& meta = {});

void emit_breakdown(const EnergyBreakdown& breakdown, ReportFormat format,
                    std::ostream& out);

}  // namespace memjoule
