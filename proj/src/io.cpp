#include "memjoule/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memjoule/errors.hpp"

namespace memjoule {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line number, cells)
};

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");

    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      table.rows.emplace_back(line_no, std::move(cells));
    }
  }
  if (table.header.empty()) {
    throw Error(ErrorKind::Parse, source + ": empty input (no header line)");
  }
  return table;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::string& source) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) {
      if (!want.empty()) want += ',';
      want += h;
    }
    std::string got;
    for (const auto& h : table.header) {
      if (!got.empty()) got += ',';
      got += h;
    }
    throw Error(ErrorKind::Parse,
                source + ": expected header '" + want + "', got '" + got + "'");
  }
}

void require_cell_count(const std::pair<int, std::vector<std::string>>& row,
                        std::size_t n, const std::string& source) {
  if (row.second.size() != n) {
    throw Error(ErrorKind::Parse,
                source + ":" + std::to_string(row.first) + ": expected " +
                    std::to_string(n) + " cells, got " +
                    std::to_string(row.second.size()));
  }
}

double parse_double_cell(const std::string& cell, const std::string& source,
                         int line, const std::string& field) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || cell.empty()) {
    throw Error(ErrorKind::Parse, source + ":" + std::to_string(line) + ": field '" +
                                      field + "' is not a number: '" + cell + "'");
  }
  return value;
}

TokenCount parse_token_cell(const std::string& cell, const std::string& source,
                            int line, const std::string& field) {
  const double v = parse_double_cell(cell, source, line, field);
  if (!(v >= 0.0) || std::floor(v) != v) {
    throw Error(ErrorKind::Parse,
                source + ":" + std::to_string(line) + ": field '" + field +
                    "' must be a non-negative integer token count, got '" + cell + "'");
  }
  return static_cast<TokenCount>(v);
}

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, source + ": invalid JSON: " + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& source, const std::string& what) {
  for (const auto& item : obj.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw Error(ErrorKind::Parse,
                  source + ": unknown " + what + " field '" + item.key() + "'");
    }
  }
}

double json_number(const json& v, const std::string& source, const std::string& field) {
  if (!v.is_number()) {
    throw Error(ErrorKind::Parse, source + ": field '" + field + "' must be a number");
  }
  return v.get<double>();
}

TokenCount json_token(const json& v, const std::string& source, const std::string& field) {
  const double d = json_number(v, source, field);
  if (!(d >= 0.0) || std::floor(d) != d) {
    throw Error(ErrorKind::Parse,
                source + ": field '" + field +
                    "' must be a non-negative integer token count");
  }
  return static_cast<TokenCount>(d);
}

bool json_flag(const json& v, const std::string& source, const std::string& field) {
  if (!v.is_boolean()) {
    throw Error(ErrorKind::Parse, source + ": field '" + field + "' must be a boolean");
  }
  return v.get<bool>();
}

bool looks_like_json(const std::string& text) {
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
    return ch == '{';
  }
  return false;
}

const std::set<std::string> kWorkloadFields = {"t_q", "t_qn", "t_m", "k", "c",
                                               "beta", "t_a", "t_mg", "t_ag"};

QueryWorkload workload_from_fields(
    const std::string& source,
    const std::function<std::optional<double>(const std::string&)>& number_of,
    const std::function<std::optional<TokenCount>(const std::string&)>& token_of,
    WarningLog* notes) {
  QueryWorkload w;

  auto require_token = [&](const std::string& field) {
    auto v = token_of(field);
    if (!v) {
      throw Error(ErrorKind::Parse, source + ": required workload field '" + field +
                                        "' is missing");
    }
    return *v;
  };

  w.t_q = require_token("t_q");
  w.t_m = require_token("t_m");
  w.k = require_token("k");
  w.t_a = require_token("t_a");

  auto beta = number_of("beta");
  if (!beta) {
    throw Error(ErrorKind::Parse, source + ": required workload field 'beta' is missing");
  }
  w.beta = *beta;

  if (auto t_qn = token_of("t_qn")) {
    w.t_qn = *t_qn;
  } else {
    w.t_qn = w.t_q;
    warn(notes, "t_qn absent; defaulted to t_q (" + std::to_string(w.t_q) + ")");
  }
  if (auto c = token_of("c")) {
    w.c = *c;
  } else {
    w.c = 5;
    warn(notes, "c absent; defaulted to 5 detection output tokens");
  }
  w.t_mg = token_of("t_mg");
  w.t_ag = token_of("t_ag");
  if (!w.t_mg || !w.t_ag) {
    warn(notes, "t_mg/t_ag absent; optimal-case energy and geor unavailable");
  }

  validate_workload(w);
  return w;
}

QueryWorkload workload_from_json_object(const json& obj, const std::string& source,
                                        WarningLog* notes) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::Parse, source + ": workload must be a JSON object");
  }
  reject_unknown_keys(obj, kWorkloadFields, source, "workload");
  auto number_of = [&](const std::string& f) -> std::optional<double> {
    if (!obj.contains(f) || obj[f].is_null()) return std::nullopt;
    return json_number(obj[f], source, f);
  };
  auto token_of = [&](const std::string& f) -> std::optional<TokenCount> {
    if (!obj.contains(f) || obj[f].is_null()) return std::nullopt;
    return json_token(obj[f], source, f);
  };
  return workload_from_fields(source, number_of, token_of, notes);
}

PipelineConfig config_from_json_object(const json& obj, const std::string& source,
                                       WarningLog* notes) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::Parse, source + ": config must be a JSON object");
  }
  const std::set<std::string> allowed = {
      "detection_enabled",       "query_opt_enabled",
      "rerank_enabled",          "compression_enabled",
      "retrieval_energy_per_query", "retrieval_energy_per_memory_token"};
  reject_unknown_keys(obj, allowed, source, "config");

  PipelineConfig c;
  if (obj.contains("detection_enabled"))
    c.detection_enabled = json_flag(obj["detection_enabled"], source, "detection_enabled");
  if (obj.contains("query_opt_enabled"))
    c.query_opt_enabled = json_flag(obj["query_opt_enabled"], source, "query_opt_enabled");
  if (obj.contains("rerank_enabled"))
    c.rerank_enabled = json_flag(obj["rerank_enabled"], source, "rerank_enabled");
  if (obj.contains("compression_enabled"))
    c.compression_enabled = json_flag(obj["compression_enabled"], source, "compression_enabled");

  const bool has_per_query = obj.contains("retrieval_energy_per_query");
  const bool has_per_token = obj.contains("retrieval_energy_per_memory_token");
  if (has_per_query)
    c.retrieval_energy_per_query =
        json_number(obj["retrieval_energy_per_query"], source, "retrieval_energy_per_query");
  if (has_per_token)
    c.retrieval_energy_per_memory_token =
        json_number(obj["retrieval_energy_per_memory_token"], source,
                    "retrieval_energy_per_memory_token");
  if (!has_per_query && !has_per_token) {
    warn(notes,
         "retrieval energy not configured; E_retr defaults to 0 J "
         "(set retrieval_energy_per_query / retrieval_energy_per_memory_token)");
  }
  validate_config(c);
  return c;
}

std::optional<double> optional_double_cell(const std::string& cell,
                                           const std::string& source, int line,
                                           const std::string& field) {
  if (cell.empty()) return std::nullopt;
  return parse_double_cell(cell, source, line, field);
}

std::optional<TokenCount> optional_token_cell(const std::string& cell,
                                              const std::string& source, int line,
                                              const std::string& field) {
  if (cell.empty()) return std::nullopt;
  return parse_token_cell(cell, source, line, field);
}

}  // namespace

std::vector<EnergySample> parse_samples_csv(std::istream& in, const std::string& source) {
  CsvTable table = read_csv(in, source);
  require_header(table, {"t_in", "t_out", "joules"}, source);
  std::vector<EnergySample> samples;
  samples.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    require_cell_count(row, 3, source);
    EnergySample s;
    s.t_in = parse_token_cell(row.second[0], source, row.first, "t_in");
    s.t_out = parse_token_cell(row.second[1], source, row.first, "t_out");
    s.energy = parse_double_cell(row.second[2], source, row.first, "joules");
    if (s.energy < 0.0) {
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(row.first) +
                                        ": joules must be >= 0");
    }
    samples.push_back(s);
  }
  return samples;
}

void write_samples_csv(const std::vector<EnergySample>& samples, std::ostream& out) {
  out << "t_in,t_out,joules\n";
  for (const auto& s : samples) {
    out << s.t_in << ',' << s.t_out << ',' << format_double(s.energy) << '\n';
  }
}

EnergyModelCoefficients parse_model_json(const std::string& text, const std::string& source,
                                         WarningLog* warnings) {
  const json obj = parse_json_text(text, source);
  if (!obj.is_object()) {
    throw Error(ErrorKind::Parse, source + ": model must be a JSON object");
  }
  reject_unknown_keys(obj, {"model_id", "alpha_in", "alpha_out", "alpha_cross", "r_squared"},
                      source, "model");
  for (const char* field : {"model_id", "alpha_in", "alpha_out", "alpha_cross"}) {
    if (!obj.contains(field)) {
      throw Error(ErrorKind::Parse,
                  source + ": required model field '" + std::string(field) + "' is missing");
    }
  }
  if (!obj["model_id"].is_string()) {
    throw Error(ErrorKind::Parse, source + ": field 'model_id' must be a string");
  }

  EnergyModelCoefficients model;
  model.model_id = obj["model_id"].get<std::string>();
  model.alpha_in = json_number(obj["alpha_in"], source, "alpha_in");
  model.alpha_out = json_number(obj["alpha_out"], source, "alpha_out");
  model.alpha_cross = json_number(obj["alpha_cross"], source, "alpha_cross");
  if (obj.contains("r_squared") && !obj["r_squared"].is_null()) {
    model.r_squared = json_number(obj["r_squared"], source, "r_squared");
  }
  validate_model(model);
  if (!(model.alpha_out > model.alpha_in && model.alpha_out > model.alpha_cross)) {
    warn(warnings,
         "advisory: alpha_out does not exceed both alpha_in and alpha_cross; "
         "output-token cost is normally dominant for LLM inference");
  }
  return model;
}

std::string model_to_json(const EnergyModelCoefficients& model) {
  json obj;
  obj["model_id"] = model.model_id;
  obj["alpha_in"] = model.alpha_in;
  obj["alpha_out"] = model.alpha_out;
  obj["alpha_cross"] = model.alpha_cross;
  if (model.r_squared) {
    obj["r_squared"] = *model.r_squared;
  } else {
    obj["r_squared"] = nullptr;
  }
  return obj.dump(2) + "\n";
}

QueryWorkload parse_workload(const std::string& text, const std::string& source,
                             WarningLog* notes) {
  if (looks_like_json(text)) {
    return workload_from_json_object(parse_json_text(text, source), source, notes);
  }

  std::istringstream in(text);
  CsvTable table = read_csv(in, source);
  for (const auto& name : table.header) {
    if (kWorkloadFields.find(name) == kWorkloadFields.end()) {
      throw Error(ErrorKind::Parse, source + ": unknown workload field '" + name + "'");
    }
  }
  std::set<std::string> seen(table.header.begin(), table.header.end());
  if (seen.size() != table.header.size()) {
    throw Error(ErrorKind::Parse, source + ": duplicate workload field in header");
  }
  if (table.rows.size() != 1) {
    throw Error(ErrorKind::Parse, source + ": workload CSV must contain exactly one row, got " +
                                      std::to_string(table.rows.size()));
  }
  const auto& row = table.rows.front();
  require_cell_count(row, table.header.size(), source);

  auto cell_of = [&](const std::string& field) -> std::optional<std::string> {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == field && !row.second[i].empty()) return row.second[i];
    }
    return std::nullopt;
  };
  auto number_of = [&](const std::string& f) -> std::optional<double> {
    auto cell = cell_of(f);
    if (!cell) return std::nullopt;
    return parse_double_cell(*cell, source, row.first, f);
  };
  auto token_of = [&](const std::string& f) -> std::optional<TokenCount> {
    auto cell = cell_of(f);
    if (!cell) return std::nullopt;
    return parse_token_cell(*cell, source, row.first, f);
  };
  return workload_from_fields(source, number_of, token_of, notes);
}

PipelineConfig parse_config_json(const std::string& text, const std::string& source,
                                 WarningLog* notes) {
  return config_from_json_object(parse_json_text(text, source), source, notes);
}

std::vector<ScoreRow> parse_scores_csv(std::istream& in, const std::string& source) {
  CsvTable table = read_csv(in, source);
  require_header(table, {"label", "relevance", "accuracy", "faithfulness", "correctness"},
                 source);
  std::vector<ScoreRow> rows;
  std::set<std::string> labels;
  for (const auto& row : table.rows) {
    require_cell_count(row, 5, source);
    ScoreRow r;
    r.label = row.second[0];
    if (r.label.empty()) {
      throw Error(ErrorKind::Parse,
                  source + ":" + std::to_string(row.first) + ": label must be non-empty");
    }
    if (!labels.insert(r.label).second) {
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(row.first) +
                                        ": duplicate label '" + r.label + "'");
    }
    const char* names[4] = {"relevance", "accuracy", "faithfulness", "correctness"};
    std::optional<double>* slots[4] = {&r.scores.relevance, &r.scores.accuracy,
                                       &r.scores.faithfulness, &r.scores.correctness};
    for (int i = 0; i < 4; ++i) {
      auto v = optional_double_cell(row.second[i + 1], source, row.first, names[i]);
      if (v && !(*v >= 0.0 && *v <= 100.0)) {
        throw Error(ErrorKind::Parse, source + ":" + std::to_string(row.first) +
                                          ": score '" + names[i] +
                                          "' must lie in [0, 100], got " + row.second[i + 1]);
      }
      *slots[i] = v;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MetricsInputRow> parse_energies_csv(std::istream& in, const std::string& source) {
  CsvTable table = read_csv(in, source);
  require_header(table,
                 {"label", "total_energy_j", "memory_tokens", "writing_time_s",
                  "reading_time_s", "e_real_j", "response_tokens", "latency_s"},
                 source);
  std::vector<MetricsInputRow> rows;
  std::set<std::string> labels;
  for (const auto& row : table.rows) {
    require_cell_count(row, 8, source);
    MetricsInputRow r;
    r.label = row.second[0];
    if (r.label.empty()) {
      throw Error(ErrorKind::Parse,
                  source + ":" + std::to_string(row.first) + ": label must be non-empty");
    }
    if (!labels.insert(r.label).second) {
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(row.first) +
                                        ": duplicate label '" + r.label + "'");
    }
    r.total_energy_j = optional_double_cell(row.second[1], source, row.first, "total_energy_j");
    r.memory_tokens = optional_token_cell(row.second[2], source, row.first, "memory_tokens");
    r.writing_time_s = optional_double_cell(row.second[3], source, row.first, "writing_time_s");
    r.reading_time_s = optional_double_cell(row.second[4], source, row.first, "reading_time_s");
    r.e_real_j = optional_double_cell(row.second[5], source, row.first, "e_real_j");
    r.response_tokens = optional_token_cell(row.second[6], source, row.first, "response_tokens");
    r.latency_s = optional_double_cell(row.second[7], source, row.first, "latency_s");

    for (const auto& [value, name] :
         {std::pair{r.total_energy_j, "total_energy_j"},
          std::pair{r.writing_time_s, "writing_time_s"},
          std::pair{r.reading_time_s, "reading_time_s"},
          std::pair{r.e_real_j, "e_real_j"},
          std::pair{r.latency_s, "latency_s"}}) {
      if (value && *value < 0.0) {
        throw Error(ErrorKind::Parse, source + ":" + std::to_string(row.first) +
                                          ": field '" + name + "' must be >= 0");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

PowerTrace parse_gpu_trace_csv(std::istream& in, const std::string& source) {
  CsvTable table = read_csv(in, source);
  require_header(table, {"timestamp_s", "power_mw"}, source);
  PowerTrace trace;
  trace.samples.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    require_cell_count(row, 2, source);
    PowerSample s;
    s.timestamp = parse_double_cell(row.second[0], source, row.first, "timestamp_s");
    const double mw = parse_double_cell(row.second[1], source, row.first, "power_mw");
    if (mw < 0.0) {
      throw Error(ErrorKind::Parse,
                  source + ":" + std::to_string(row.first) + ": power_mw must be >= 0");
    }
    s.power = mw / 1000.0;  // file carries milliwatts
    trace.samples.push_back(s);
  }
  try {
    validate_power_trace(trace);
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, source + ": " + e.what());
  }
  return trace;
}

CumulativeEnergyTrace parse_cpu_trace_csv(std::istream& in, const std::string& source,
                                          double wrap_range_uj) {
  CsvTable table = read_csv(in, source);
  require_header(table, {"timestamp_s", "energy_uj"}, source);
  CumulativeEnergyTrace trace;
  trace.wrap_range_uj = wrap_range_uj;
  trace.samples.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    require_cell_count(row, 2, source);
    CounterSample s;
    s.timestamp = parse_double_cell(row.second[0], source, row.first, "timestamp_s");
    s.counter_uj = parse_double_cell(row.second[1], source, row.first, "energy_uj");
    trace.samples.push_back(s);
  }
  try {
    validate_counter_trace(trace);
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, source + ": " + e.what());
  }
  return trace;
}

double parse_wrap_range_sidecar(const std::string& text, const std::string& source) {
  const json obj = parse_json_text(text, source);
  if (!obj.is_object() || !obj.contains("wrap_range_uj")) {
    throw Error(ErrorKind::Parse, source + ": expected JSON object with 'wrap_range_uj'");
  }
  reject_unknown_keys(obj, {"wrap_range_uj"}, source, "sidecar");
  const double wrap = json_number(obj["wrap_range_uj"], source, "wrap_range_uj");
  if (!(wrap > 0.0)) {
    throw Error(ErrorKind::Parse, source + ": wrap_range_uj must be > 0");
  }
  return wrap;
}

std::vector<InferenceInterval> parse_intervals_csv(std::istream& in,
                                                   const std::string& source) {
  CsvTable table = read_csv(in, source);
  require_header(table, {"label", "start_s", "end_s", "t_in", "t_out"}, source);
  std::vector<InferenceInterval> intervals;
  intervals.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    require_cell_count(row, 5, source);
    InferenceInterval iv;
    iv.label = row.second[0];
    iv.start = parse_double_cell(row.second[1], source, row.first, "start_s");
    iv.end = parse_double_cell(row.second[2], source, row.first, "end_s");
    iv.t_in = parse_token_cell(row.second[3], source, row.first, "t_in");
    iv.t_out = parse_token_cell(row.second[4], source, row.first, "t_out");
    try {
      validate_interval(iv);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse,
                  source + ":" + std::to_string(row.first) + ": " + e.what());
    }
    intervals.push_back(std::move(iv));
  }
  return intervals;
}

SweepSpec parse_sweep_spec_json(const std::string& text, const std::string& source,
                                WarningLog* notes) {
  const json obj = parse_json_text(text, source);
  if (!obj.is_object()) {
    throw Error(ErrorKind::Parse, source + ": sweep spec must be a JSON object");
  }
  reject_unknown_keys(obj,
                      {"parameter", "values", "node_size_tokens", "base_workload",
                       "variant_config", "baseline_config"},
                      source, "sweep spec");
  for (const char* field : {"parameter", "values", "base_workload"}) {
    if (!obj.contains(field)) {
      throw Error(ErrorKind::Parse,
                  source + ": required sweep field '" + std::string(field) + "' is missing");
    }
  }
  if (!obj["parameter"].is_string()) {
    throw Error(ErrorKind::Parse, source + ": field 'parameter' must be a string");
  }

  SweepSpec spec;
  spec.parameter = parse_sweep_parameter(obj["parameter"].get<std::string>());
  if (!obj["values"].is_array() || obj["values"].empty()) {
    throw Error(ErrorKind::Parse, source + ": field 'values' must be a non-empty array");
  }
  for (const auto& v : obj["values"]) {
    spec.values.push_back(json_number(v, source, "values"));
  }
  if (obj.contains("node_size_tokens")) {
    spec.node_size_tokens = json_number(obj["node_size_tokens"], source, "node_size_tokens");
  } else if (spec.parameter == SweepParameter::TopK) {
    throw Error(ErrorKind::Parse,
                source + ": top_k sweeps require 'node_size_tokens' to derive t_m");
  }
  spec.base_workload = workload_from_json_object(obj["base_workload"], source, notes);
  if (obj.contains("variant_config")) {
    spec.variant_config = config_from_json_object(obj["variant_config"], source, notes);
  }
  if (obj.contains("baseline_config")) {
    spec.baseline_config = config_from_json_object(obj["baseline_config"], source, notes);
  } else {
    // Table-style default: the baseline runs retrieval + generation only.
    spec.baseline_config.detection_enabled = false;
    spec.baseline_config.query_opt_enabled = false;
    spec.baseline_config.rerank_enabled = false;
    spec.baseline_config.compression_enabled = false;
    spec.baseline_config.retrieval_energy_per_query =
        spec.variant_config.retrieval_energy_per_query;
    spec.baseline_config.retrieval_energy_per_memory_token =
        spec.variant_config.retrieval_energy_per_memory_token;
    warn(notes, "baseline_config absent; defaulted to retrieval + generation only");
  }
  validate_sweep_spec(spec);
  return spec;
}

}  // namespace memjoule
