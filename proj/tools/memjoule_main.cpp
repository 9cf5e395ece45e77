// memjoule command-line front end: fit / simulate / metrics / trace / sweep.
// Data goes to the chosen destination, diagnostics to stderr. Exit codes:
// 0 success, 2 input or schema error, 3 numerical degeneracy, 4 trace
// coverage error, 1 internal fault.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "memjoule/errors.hpp"
#include "memjoule/io.hpp"
#include "memjoule/metrics.hpp"
#include "memjoule/numeric.hpp"
#include "memjoule/pipeline.hpp"
#include "memjoule/report.hpp"
#include "memjoule/sweep.hpp"
#include "memjoule/trace.hpp"
#include "memjoule/warnings.hpp"

namespace {

using namespace memjoule;
using ordered_json = nlohmann::ordered_json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Io:
    case ErrorKind::Domain:
    case ErrorKind::InvalidModel:
      return 2;
    case ErrorKind::InsufficientData:
    case ErrorKind::DegenerateDesign:
    case ErrorKind::ZeroVariance:
    case ErrorKind::InvalidDenominator:
      return 3;
    case ErrorKind::Coverage:
      return 4;
  }
  return 1;
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open input file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string source_name(const std::string& path) {
  return path == "-" ? "<stdin>" : path;
}

// Writes data to a file or stdout; file errors name the destination.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) : path_(path) {
    if (path_ != "-") {
      file_.open(path_, std::ios::binary);
      if (!file_) {
        throw Error(ErrorKind::Io, "cannot open output file '" + path_ + "'");
      }
    }
  }

  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }

  void finish() {
    stream().flush();
    if (path_ != "-" && !file_) {
      throw Error(ErrorKind::Io, "write to '" + path_ + "' failed");
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void print_diagnostics(const WarningLog& log, const char* prefix) {
  for (const auto& m : log.messages()) {
    std::cerr << prefix << ": " << m << '\n';
  }
}

double round_sig(double v, int digits) {
  if (digits <= 0) return v;
  return std::strtod(format_double_digits(v, digits).c_str(), nullptr);
}

EnergyBreakdown round_breakdown(const EnergyBreakdown& b, int digits) {
  if (digits <= 0) return b;
  EnergyBreakdown r;
  r.e_retr = round_sig(b.e_retr, digits);
  r.e1_detection = round_sig(b.e1_detection, digits);
  r.e2_query_opt = round_sig(b.e2_query_opt, digits);
  r.e3_rerank = round_sig(b.e3_rerank, digits);
  r.e4_compression = round_sig(b.e4_compression, digits);
  r.e5_generation = round_sig(b.e5_generation, digits);
  r.e_total = round_sig(b.e_total, digits);
  return r;
}

ordered_json breakdown_json(const EnergyBreakdown& b) {
  ordered_json obj;
  obj["e_retr"] = b.e_retr;
  obj["e1_detection"] = b.e1_detection;
  obj["e2_query_opt"] = b.e2_query_opt;
  obj["e3_rerank"] = b.e3_rerank;
  obj["e4_compression"] = b.e4_compression;
  obj["e5_generation"] = b.e5_generation;
  obj["e_total"] = b.e_total;
  return obj;
}

struct CommonOptions {
  std::string out = "-";
  std::string format;
  bool no_meta = false;
  int digits = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, const std::string& default_format) {
  cmd->add_option("-o,--out", opts.out, "Output destination ('-' for stdout)");
  if (!default_format.empty()) {
    opts.format = default_format;
    cmd->add_option("--format", opts.format, "Report encoding: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  }
  cmd->add_flag("--no-meta", opts.no_meta, "Omit the timestamped metadata block");
  cmd->add_option("--digits", opts.digits,
                  "Round emitted numbers to N significant digits (default: full precision)");
}

ReportMeta meta_for(const CommonOptions& opts) {
  return opts.no_meta ? ReportMeta{} : make_report_meta();
}

// ---- fit -------------------------------------------------------------

struct FitOptions {
  std::string samples_path;
  std::string model_id;
  CommonOptions common;
};

int run_fit(const FitOptions& opts) {
  const std::string text = read_input(opts.samples_path);
  std::istringstream in(text);
  const auto samples = parse_samples_csv(in, source_name(opts.samples_path));

  WarningLog warnings;
  const auto model = fit_energy_model(samples, opts.model_id, &warnings);
  print_diagnostics(warnings, "warning");

  OutputTarget out(opts.common.out);
  out.stream() << model_to_json(model);
  out.finish();

  // With --out the data artifact is the file, so the human summary may own
  // stdout; when the model itself goes to stdout the summary moves to stderr.
  std::ostream& summary = opts.common.out == "-" ? std::cerr : std::cout;
  const int d = opts.common.digits;
  summary << "model_id: " << model.model_id << '\n'
          << "alpha_in: " << format_double_digits(model.alpha_in, d) << '\n'
          << "alpha_out: " << format_double_digits(model.alpha_out, d) << '\n'
          << "alpha_cross: " << format_double_digits(model.alpha_cross, d) << '\n'
          << "r_squared: "
          << (model.r_squared ? format_double_digits(*model.r_squared, d)
                              : std::string("null"))
          << '\n'
          << "samples: " << samples.size() << '\n';
  return 0;
}

// ---- simulate --------------------------------------------------------

struct SimulateOptions {
  std::string model_path;
  std::string workload_path;
  std::string config_path;
  std::optional<TokenCount> c_override;
  std::optional<double> beta_override;
  std::optional<double> per_query_override;
  std::optional<double> per_token_override;
  CommonOptions common;
};

int run_simulate(const SimulateOptions& opts) {
  WarningLog notes;
  WarningLog warnings;

  const auto model = parse_model_json(read_input(opts.model_path),
                                      source_name(opts.model_path), &warnings);
  QueryWorkload workload = parse_workload(read_input(opts.workload_path),
                                          source_name(opts.workload_path), &notes);
  PipelineConfig config;
  if (!opts.config_path.empty()) {
    config = parse_config_json(read_input(opts.config_path),
                               source_name(opts.config_path), &notes);
  } else {
    notes.add("config absent; all stages enabled, retrieval energy 0 J");
  }

  if (opts.c_override) {
    workload.c = *opts.c_override;
    notes.add("c overridden to " + std::to_string(workload.c));
  }
  if (opts.beta_override) {
    workload.beta = *opts.beta_override;
    notes.add("beta overridden to " + format_double(workload.beta));
  }
  if (opts.per_query_override) {
    config.retrieval_energy_per_query = *opts.per_query_override;
    notes.add("retrieval_energy_per_query overridden to " +
              format_double(config.retrieval_energy_per_query));
  }
  if (opts.per_token_override) {
    config.retrieval_energy_per_memory_token = *opts.per_token_override;
    notes.add("retrieval_energy_per_memory_token overridden to " +
              format_double(config.retrieval_energy_per_memory_token));
  }
  validate_workload(workload);
  validate_config(config);

  const EnergyBreakdown breakdown =
      round_breakdown(simulate_pipeline(model, config, workload, &warnings),
                      opts.common.digits);

  std::optional<double> e_opt;
  std::optional<double> ratio;
  if (workload.t_mg && workload.t_ag) {
    e_opt = round_sig(optimal_energy(model, config, workload, &warnings),
                      opts.common.digits);
    if (breakdown.e_total > 0.0) {
      ratio = round_sig(geor(*e_opt, breakdown.e_total), opts.common.digits);
    } else {
      notes.add("e_total is 0; geor omitted");
    }
  }

  print_diagnostics(notes, "note");
  print_diagnostics(warnings, "warning");

  OutputTarget out(opts.common.out);
  if (opts.common.format == "csv") {
    emit_breakdown(breakdown, ReportFormat::Csv, out.stream());
    out.finish();
    return 0;
  }

  ordered_json doc;
  doc["breakdown"] = breakdown_json(breakdown);
  if (e_opt) doc["e_optimal"] = *e_opt;
  if (ratio) doc["geor"] = *ratio;
  doc["notes"] = notes.messages();
  doc["warnings"] = warnings.messages();
  if (!opts.common.no_meta) {
    const auto meta = make_report_meta();
    doc["meta"] = {{"tool", "memjoule"}, {"generated_utc", meta.generated_utc}};
  }
  out.stream() << doc.dump(2) << '\n';
  out.finish();
  return 0;
}

// ---- metrics ---------------------------------------------------------

struct MetricsOptions {
  std::string energies_path;
  std::string scores_path;
  std::string baseline;
  CommonOptions common;
};

int run_metrics(const MetricsOptions& opts) {
  const std::string energies_text = read_input(opts.energies_path);
  std::istringstream energies_in(energies_text);
  auto rows = parse_energies_csv(energies_in, source_name(opts.energies_path));

  const std::string scores_text = read_input(opts.scores_path);
  std::istringstream scores_in(scores_text);
  const auto scores = parse_scores_csv(scores_in, source_name(opts.scores_path));

  for (const auto& score_row : scores) {
    bool joined = false;
    for (auto& row : rows) {
      if (row.label == score_row.label) {
        row.scores = score_row.scores;
        joined = true;
        break;
      }
    }
    if (!joined) {
      throw Error(ErrorKind::Parse, "label '" + score_row.label +
                                        "' in scores file has no matching energies row");
    }
  }

  std::optional<std::string> baseline;
  if (!opts.baseline.empty()) baseline = opts.baseline;
  MetricsReport report = build_metrics_report(rows, baseline);

  if (opts.common.digits > 0) {
    for (auto& row : report.rows) {
      for (auto* v : {&row.rerr, &row.ear, &row.gerr, &row.efr, &row.ecr, &row.e_token_m,
                      &row.e_token_g, &row.latency_per_token, &row.multiple_vs_baseline}) {
        if (*v) *v = round_sig(**v, opts.common.digits);
      }
    }
  }

  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

  OutputTarget out(opts.common.out);
  emit_metrics_report(report, parse_report_format(opts.common.format), out.stream(),
                      meta_for(opts.common));
  out.finish();
  return 0;
}

// ---- trace -----------------------------------------------------------

struct TraceOptions {
  std::string intervals_path;
  std::string cpu_path;
  std::string gpu_path;
  std::optional<double> wrap_range_uj;
  std::optional<double> idle_cpu;
  std::optional<double> idle_gpu;
  CommonOptions common;
};

int run_trace(const TraceOptions& opts) {
  if (opts.cpu_path.empty() && opts.gpu_path.empty()) {
    throw Error(ErrorKind::Parse, "trace requires at least one of --cpu / --gpu");
  }

  const std::string intervals_text = read_input(opts.intervals_path);
  std::istringstream intervals_in(intervals_text);
  const auto intervals = parse_intervals_csv(intervals_in, source_name(opts.intervals_path));

  std::optional<CumulativeEnergyTrace> cpu;
  if (!opts.cpu_path.empty()) {
    double wrap = 0.0;
    if (opts.wrap_range_uj) {
      wrap = *opts.wrap_range_uj;
      if (!(wrap > 0.0)) {
        throw Error(ErrorKind::Parse, "--wrap-range must be > 0");
      }
    } else {
      const std::string sidecar_path = opts.cpu_path + ".json";
      if (opts.cpu_path == "-" || !std::filesystem::exists(sidecar_path)) {
        throw Error(ErrorKind::Parse,
                    "CPU counter wrap range unknown; pass --wrap-range or provide sidecar '" +
                        sidecar_path + "'");
      }
      wrap = parse_wrap_range_sidecar(read_input(sidecar_path), sidecar_path);
    }
    const std::string text = read_input(opts.cpu_path);
    std::istringstream in(text);
    cpu = parse_cpu_trace_csv(in, source_name(opts.cpu_path), wrap);
  }

  std::optional<PowerTrace> gpu;
  if (!opts.gpu_path.empty()) {
    const std::string text = read_input(opts.gpu_path);
    std::istringstream in(text);
    gpu = parse_gpu_trace_csv(in, source_name(opts.gpu_path));
  }

  IdlePower idle;
  idle.cpu_watts = opts.idle_cpu;
  idle.gpu_watts = opts.idle_gpu;

  WarningLog warnings;
  const auto samples = build_samples(cpu ? &*cpu : nullptr, gpu ? &*gpu : nullptr,
                                     intervals, idle, &warnings);
  print_diagnostics(warnings, "warning");

  OutputTarget out(opts.common.out);
  write_samples_csv(samples, out.stream());
  out.finish();
  return 0;
}

// ---- sweep -----------------------------------------------------------

struct SweepOptions {
  std::string model_path;
  std::string spec_path;
  CommonOptions common;
};

int run_sweep_cmd(const SweepOptions& opts) {
  WarningLog notes;
  WarningLog warnings;
  const auto model = parse_model_json(read_input(opts.model_path),
                                      source_name(opts.model_path), &warnings);
  const auto spec = parse_sweep_spec_json(read_input(opts.spec_path),
                                          source_name(opts.spec_path), &notes);
  auto rows = run_sweep(model, spec, &warnings);
  if (opts.common.digits > 0) {
    for (auto& row : rows) {
      row.variant = round_breakdown(row.variant, opts.common.digits);
      row.baseline = round_breakdown(row.baseline, opts.common.digits);
      row.energy_multiple = round_sig(row.energy_multiple, opts.common.digits);
    }
  }

  print_diagnostics(notes, "note");
  print_diagnostics(warnings, "warning");

  OutputTarget out(opts.common.out);
  emit_sweep_report(rows, parse_report_format(opts.common.format), out.stream(),
                    meta_for(opts.common));
  out.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy cost modelling for memory-augmented LLM pipelines"};
  app.require_subcommand(1);

  FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit the bilinear energy model from a samples CSV");
  fit_cmd->add_option("samples", fit_opts.samples_path, "Samples CSV (t_in,t_out,joules)")
      ->required();
  fit_cmd->add_option("--model-id", fit_opts.model_id, "Label for the fitted model")
      ->required();
  add_common(fit_cmd, fit_opts.common, "");

  SimulateOptions sim_opts;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Compute the per-stage energy breakdown for one workload");
  sim_cmd->add_option("--model", sim_opts.model_path, "Model JSON")->required();
  sim_cmd->add_option("--workload", sim_opts.workload_path, "Workload JSON or CSV")
      ->required();
  sim_cmd->add_option("--config", sim_opts.config_path, "Pipeline config JSON");
  sim_cmd->add_option("--c", sim_opts.c_override, "Override detection output tokens");
  sim_cmd->add_option("--beta", sim_opts.beta_override, "Override compression ratio");
  sim_cmd->add_option("--per-query-j", sim_opts.per_query_override,
                      "Override retrieval energy per query (J)");
  sim_cmd->add_option("--per-token-j", sim_opts.per_token_override,
                      "Override retrieval energy per memory token (J)");
  add_common(sim_cmd, sim_opts.common, "json");

  MetricsOptions metrics_opts;
  auto* metrics_cmd = app.add_subcommand(
      "metrics", "Compute energy-performance ratios and baseline multiples");
  metrics_cmd->add_option("--energies", metrics_opts.energies_path, "Energies CSV")
      ->required();
  metrics_cmd->add_option("--scores", metrics_opts.scores_path, "Scores CSV")->required();
  metrics_cmd->add_option("--baseline", metrics_opts.baseline,
                          "Baseline label for cost multiples");
  add_common(metrics_cmd, metrics_opts.common, "json");

  TraceOptions trace_opts;
  auto* trace_cmd = app.add_subcommand(
      "trace", "Integrate power/energy traces into fit-ready samples");
  trace_cmd->add_option("--intervals", trace_opts.intervals_path,
                        "Intervals CSV (label,start_s,end_s,t_in,t_out)")
      ->required();
  trace_cmd->add_option("--cpu", trace_opts.cpu_path, "CPU energy counter CSV");
  trace_cmd->add_option("--gpu", trace_opts.gpu_path, "GPU power CSV");
  trace_cmd->add_option("--wrap-range", trace_opts.wrap_range_uj,
                        "CPU counter wrap range (uJ)");
  trace_cmd->add_option("--idle-cpu", trace_opts.idle_cpu, "CPU idle power to subtract (W)");
  trace_cmd->add_option("--idle-gpu", trace_opts.idle_gpu, "GPU idle power to subtract (W)");
  add_common(trace_cmd, trace_opts.common, "");

  SweepOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Evaluate a workload sweep against a baseline configuration");
  sweep_cmd->add_option("--model", sweep_opts.model_path, "Model JSON")->required();
  sweep_cmd->add_option("--spec", sweep_opts.spec_path, "Sweep spec JSON")->required();
  add_common(sweep_cmd, sweep_opts.common, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return run_fit(fit_opts);
    if (app.got_subcommand(sim_cmd)) return run_simulate(sim_opts);
    if (app.got_subcommand(metrics_cmd)) return run_metrics(metrics_opts);
    if (app.got_subcommand(trace_cmd)) return run_trace(trace_opts);
    if (app.got_subcommand(sweep_cmd)) return run_sweep_cmd(sweep_opts);
  } catch (const memjoule::Error& e) {
    std::cerr << "error (" << error_kind_name(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
