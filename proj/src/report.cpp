#include "memjoule/report.hpp"

#include <chrono>
#include <ctime>
#include <ostream>

#include <json.hpp>

#include "memjoule/errors.hpp"
#include "memjoule/numeric.hpp"

namespace memjoule {

namespace {

using json = nlohmann::ordered_json;

json breakdown_to_json(const EnergyBreakdown& b) {
  json obj;
  obj["e_retr"] = b.e_retr;
  obj["e1_detection"] = b.e1_detection;
  obj["e2_query_opt"] = b.e2_query_opt;
  obj["e3_rerank"] = b.e3_rerank;
  obj["e4_compression"] = b.e4_compression;
  obj["e5_generation"] = b.e5_generation;
  obj["e_total"] = b.e_total;
  return obj;
}

EnergyBreakdown breakdown_from_json(const json& obj) {
  EnergyBreakdown b;
  b.e_retr = obj.at("e_retr").get<double>();
  b.e1_detection = obj.at("e1_detection").get<double>();
  b.e2_query_opt = obj.at("e2_query_opt").get<double>();
  b.e3_rerank = obj.at("e3_rerank").get<double>();
  b.e4_compression = obj.at("e4_compression").get<double>();
  b.e5_generation = obj.at("e5_generation").get<double>();
  b.e_total = obj.at("e_total").get<double>();
  return b;
}

void append_breakdown_csv(std::string& line, const EnergyBreakdown& b) {
  for (double v : {b.e_retr, b.e1_detection, b.e2_query_opt, b.e3_rerank,
                   b.e4_compression, b.e5_generation, b.e_total}) {
    line += ',';
    line += format_double(v);
  }
}

json optional_to_json(const std::optional<double>& v) {
  if (v) return json(*v);
  return json(nullptr);
}

std::string optional_to_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

void attach_meta(json& obj, const ReportMeta& meta) {
  if (!meta.enabled) return;
  json m;
  m["tool"] = "memjoule";
  m["generated_utc"] = meta.generated_utc;
  obj["meta"] = std::move(m);
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw Error(ErrorKind::Parse, "unknown report format '" + name + "' (expected csv or json)");
}

ReportMeta make_report_meta() {
  ReportMeta meta;
  meta.enabled = true;
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  meta.generated_utc = buf;
  return meta;
}

void emit_sweep_report(const std::vector<SweepRow>& rows, ReportFormat format,
                       std::ostream& out, const ReportMeta& meta) {
  if (format == ReportFormat::Csv) {
    if (meta.enabled) {
      out << "# tool: memjoule\n# generated_utc: " << meta.generated_utc << "\n";
    }
    out << "param,e_retr_v,e1_v,e2_v,e3_v,e4_v,e5_v,e_total_v,"
           "e_retr_b,e1_b,e2_b,e3_b,e4_b,e5_b,e_total_b,multiple\n";
    for (const auto& row : rows) {
      std::string line = format_double(row.parameter_value);
      append_breakdown_csv(line, row.variant);
      append_breakdown_csv(line, row.baseline);
      line += ',';
      line += format_double(row.energy_multiple);
      out << line << '\n';
    }
    return;
  }

  json doc;
  json arr = json::array();
  for (const auto& row : rows) {
    json r;
    r["param"] = row.parameter_value;
    r["variant"] = breakdown_to_json(row.variant);
    r["baseline"] = breakdown_to_json(row.baseline);
    r["multiple"] = row.energy_multiple;
    arr.push_back(std::move(r));
  }
  doc["rows"] = std::move(arr);
  attach_meta(doc, meta);
  out << doc.dump(2) << '\n';
}

std::vector<SweepRow> parse_sweep_report_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("invalid sweep report JSON: ") + e.what());
  }
  std::vector<SweepRow> rows;
  for (const auto& r : doc.at("rows")) {
    SweepRow row;
    row.parameter_value = r.at("param").get<double>();
    row.variant = breakdown_from_json(r.at("variant"));
    row.baseline = breakdown_from_json(r.at("baseline"));
    row.energy_multiple = r.at("multiple").get<double>();
    rows.push_back(row);
  }
  return rows;
}

void emit_metrics_report(const MetricsReport& report, ReportFormat format,
                         std::ostream& out, const ReportMeta& meta) {
  if (format == ReportFormat::Csv) {
    if (meta.enabled) {
      out << "# tool: memjoule\n# generated_utc: " << meta.generated_utc << "\n";
    }
    out << "label,rerr,ear,gerr,efr,ecr,e_token_m,e_token_g,latency_per_token,"
           "multiple_vs_baseline\n";
    for (const auto& row : report.rows) {
      out << row.label << ',' << optional_to_csv(row.rerr) << ','
          << optional_to_csv(row.ear) << ',' << optional_to_csv(row.gerr) << ','
          << optional_to_csv(row.efr) << ',' << optional_to_csv(row.ecr) << ','
          << optional_to_csv(row.e_token_m) << ',' << optional_to_csv(row.e_token_g)
          << ',' << optional_to_csv(row.latency_per_token) << ','
          << optional_to_csv(row.multiple_vs_baseline) << '\n';
    }
    return;
  }

  json doc;
  json arr = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["label"] = row.label;
    r["rerr"] = optional_to_json(row.rerr);
    r["ear"] = optional_to_json(row.ear);
    r["gerr"] = optional_to_json(row.gerr);
    r["efr"] = optional_to_json(row.efr);
    r["ecr"] = optional_to_json(row.ecr);
    r["e_token_m"] = optional_to_json(row.e_token_m);
    r["e_token_g"] = optional_to_json(row.e_token_g);
    r["latency_per_token"] = optional_to_json(row.latency_per_token);
    r["multiple_vs_baseline"] = optional_to_json(row.multiple_vs_baseline);
    arr.push_back(std::move(r));
  }
  doc["rows"] = std::move(arr);
  doc["warnings"] = report.warnings;
  attach_meta(doc, meta);
  out << doc.dump(2) << '\n';
}

void emit_breakdown(const EnergyBreakdown& breakdown, ReportFormat format,
                    std::ostream& out) {
  if (format == ReportFormat::Csv) {
    out << "e_retr,e1_detection,e2_query_opt,e3_rerank,e4_compression,"
           "e5_generation,e_total\n";
    std::string line = format_double(breakdown.e_retr);
    for (double v : {breakdown.e1_detection, breakdown.e2_query_opt, breakdown.e3_rerank,
                     breakdown.e4_compression, breakdown.e5_generation, breakdown.e_total}) {
      line += ',';
      line += format_double(v);
    }
    out << line << '\n';
    return;
  }
  out << breakdown_to_json(breakdown).dump(2) << '\n';
}

}  // namespace memjoule
