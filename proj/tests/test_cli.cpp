// Golden tests that drive the memjoule binary end to end. The binary path
// arrives via the MEMJOULE_CLI environment variable (set by ctest).

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "memjoule/numeric.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<int> g_dir_counter{0};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

class CliFixture {
 public:
  CliFixture() {
    const char* cli = std::getenv("MEMJOULE_CLI");
    REQUIRE_MESSAGE(cli != nullptr, "MEMJOULE_CLI must point at the built binary");
    cli_ = cli;
    dir_ = fs::temp_directory_path() /
           ("memjoule_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(g_dir_counter++));
    fs::create_directories(dir_);
  }

  ~CliFixture() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  CliResult run(const std::string& args) {
    const fs::path out_path = dir_ / "stdout.txt";
    const fs::path err_path = dir_ / "stderr.txt";
    const std::string cmd = "\"" + cli_ + "\" " + args + " >" + out_path.string() +
                            " 2>" + err_path.string();
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::string cli_;
  fs::path dir_;
};

const char* kPaperModelJson =
    R"({"model_id":"k8","alpha_in":0.042933,"alpha_out":9.109322,)"
    R"("alpha_cross":0.000513,"r_squared":0.989})";

const char* kWorkedWorkloadJson =
    R"({"t_q":30,"t_qn":300,"t_m":640,"k":5,"c":5,"beta":0.3,"t_a":20,)"
    R"("t_mg":128,"t_ag":20})";

std::string synthetic_samples_csv() {
  // noiseless surface of (0.05, 9.0, 0.0005): the fit must give these back
  std::ostringstream out;
  out << "t_in,t_out,joules\n";
  for (int t_in : {10, 50, 100, 200}) {
    for (int t_out : {1, 5, 10, 20, 50}) {
      const double e = 0.05 * t_in + 9.0 * t_out + 0.0005 * t_in * t_out;
      out << t_in << ',' << t_out << ',' << memjoule::format_double(e) << '\n';
    }
  }
  return out.str();
}

}  // namespace

TEST_CASE("cli fit: writes the model file and prints a full-precision summary") {
  CliFixture fx;
  const auto samples = fx.write("samples.csv", synthetic_samples_csv());
  const auto model_path = fx.dir() / "model.json";
  const auto r = fx.run("fit " + samples.string() + " --model-id synth --out " +
                        model_path.string());
  REQUIRE(r.exit_code == 0);

  const auto model = json::parse(fx.slurp(model_path));
  CHECK(model["model_id"] == "synth");
  CHECK(model["alpha_in"].get<double>() == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(model["alpha_out"].get<double>() == doctest::Approx(9.0).epsilon(1e-8));
  CHECK(model["alpha_cross"].get<double>() == doctest::Approx(0.0005).epsilon(1e-8));
  CHECK(model["r_squared"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  // summary on stdout when the model goes to a file
  CHECK(r.out.find("alpha_out: ") != std::string::npos);
  CHECK(r.out.find("samples: 20") != std::string::npos);

  // reruns are byte-identical
  const std::string first = fx.slurp(model_path);
  const auto again = fx.run("fit " + samples.string() + " --model-id synth --out " +
                            model_path.string());
  REQUIRE(again.exit_code == 0);
  CHECK(fx.slurp(model_path) == first);
}

TEST_CASE("cli fit: exit codes for bad inputs") {
  CliFixture fx;
  const auto empty = fx.write("empty.csv", "");
  CHECK(fx.run("fit " + empty.string() + " --model-id x").exit_code == 2);

  const auto two = fx.write("two.csv", "t_in,t_out,joules\n1,0,2.0\n0,1,3.0\n");
  CHECK(fx.run("fit " + two.string() + " --model-id x").exit_code == 3);

  const auto degenerate =
      fx.write("deg.csv", "t_in,t_out,joules\n100,50,500\n100,50,500\n100,50,500\n");
  CHECK(fx.run("fit " + degenerate.string() + " --model-id x").exit_code == 3);

  CHECK(fx.run("fit " + fx.dir().string() + "/missing.csv --model-id x").exit_code == 2);
}

TEST_CASE("cli simulate: worked fixture with geor") {
  CliFixture fx;
  const auto model = fx.write("model.json", kPaperModelJson);
  const auto workload = fx.write("w.json", kWorkedWorkloadJson);
  const auto config = fx.write("c.json", R"({"retrieval_energy_per_query":5.0})");

  const std::string args = "simulate --model " + model.string() + " --workload " +
                           workload.string() + " --config " + config.string() +
                           " --no-meta";
  const auto r = fx.run(args);
  REQUIRE(r.exit_code == 0);

  const auto doc = json::parse(r.out);
  CHECK(doc["breakdown"]["e_total"].get<double>() ==
        doctest::Approx(4912.42754).epsilon(1e-9));
  CHECK(doc["breakdown"]["e4_compression"].get<double>() ==
        doctest::Approx(1839.504384).epsilon(1e-9));
  CHECK(doc["e_optimal"].get<double>() == doctest::Approx(195.590934).epsilon(1e-9));
  CHECK(doc["geor"].get<double>() ==
        doctest::Approx(195.590934 / 4912.42754).epsilon(1e-9));
  CHECK_FALSE(doc.contains("meta"));

  // byte-identical rerun
  const auto again = fx.run(args);
  CHECK(again.out == r.out);
}

TEST_CASE("cli simulate: zero workload omits geor with a note") {
  CliFixture fx;
  const auto model = fx.write("model.json", kPaperModelJson);
  const auto workload = fx.write(
      "w.json", R"({"t_q":0,"t_qn":0,"t_m":0,"k":0,"c":0,"beta":1,"t_a":0,"t_mg":0,"t_ag":0})");
  const auto r = fx.run("simulate --model " + model.string() + " --workload " +
                        workload.string() + " --no-meta");
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["breakdown"]["e_total"].get<double>() == 0.0);
  CHECK_FALSE(doc.contains("geor"));
  bool noted = false;
  for (const auto& n : doc["notes"]) {
    if (n.get<std::string>().find("geor") != std::string::npos) noted = true;
  }
  CHECK(noted);
}

TEST_CASE("cli simulate: schema violations exit 2") {
  CliFixture fx;
  const auto model = fx.write("model.json", kPaperModelJson);
  const auto bad_beta = fx.write(
      "w.json", R"({"t_q":1,"t_qn":1,"t_m":1,"k":1,"c":1,"beta":0.0,"t_a":1})");
  CHECK(fx.run("simulate --model " + model.string() + " --workload " +
               bad_beta.string()).exit_code == 2);

  const auto bad_field = fx.write("w2.json", R"({"t_q":1,"nope":2})");
  CHECK(fx.run("simulate --model " + model.string() + " --workload " +
               bad_field.string()).exit_code == 2);
}

TEST_CASE("cli simulate: diagnostics stay on stderr, data on stdout") {
  CliFixture fx;
  const auto model = fx.write("model.json", kPaperModelJson);
  const auto workload = fx.write("w.json", kWorkedWorkloadJson);
  // no config: triggers the defaulted-config note
  const auto r = fx.run("simulate --model " + model.string() + " --workload " +
                        workload.string() + " --no-meta");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.front() == '{');
  CHECK(r.err.find("note:") != std::string::npos);
  CHECK(json::parse(r.out).contains("breakdown"));
}

namespace {

struct TableRow {
  const char* label;
  double gerr;
  double efr;
  double ecr;
};

// Internal-memory generation triples; per-row energies and scores are
// back-solved at full precision so the CLI division reproduces the triples.
constexpr TableRow kInternalRows[] = {
    {"internal_base", 0.144, 0.096, 0.328},   {"internal_det", 0.188, 0.137, 0.413},
    {"internal_qopt", 5.005, 3.312, 11.918},  {"internal_rerank", 0.584, 0.413, 1.307},
    {"internal_comp", 2.542, 1.686, 5.261},   {"internal_all", 6.561, 4.604, 14.325},
};

std::string internal_energies_csv() {
  std::ostringstream out;
  out << "label,total_energy_j,memory_tokens,writing_time_s,reading_time_s,e_real_j,"
         "response_tokens,latency_s\n";
  for (const auto& row : kInternalRows) {
    const double e_token_g = 90.0 * row.efr;
    out << row.label << ",,,,," << memjoule::format_double(e_token_g) << ",1,\n";
  }
  return out.str();
}

std::string internal_scores_csv() {
  std::ostringstream out;
  out << "label,relevance,accuracy,faithfulness,correctness\n";
  for (const auto& row : kInternalRows) {
    const double e_token_g = 90.0 * row.efr;
    out << row.label << ',' << memjoule::format_double(e_token_g / row.gerr) << ",,90,"
        << memjoule::format_double(e_token_g / row.ecr) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("cli metrics: reproduces the published internal-memory multiples") {
  CliFixture fx;
  const auto energies = fx.write("e.csv", internal_energies_csv());
  const auto scores = fx.write("s.csv", internal_scores_csv());
  const std::string args = "metrics --energies " + energies.string() + " --scores " +
                           scores.string() + " --baseline internal_base --no-meta";
  const auto r = fx.run(args);
  REQUIRE(r.exit_code == 0);

  const auto doc = json::parse(r.out);
  const auto& rows = doc["rows"];
  REQUIRE(rows.size() == 6);

  auto multiple = [&](int i) { return rows[i]["multiple_vs_baseline"].get<double>(); };
  CHECK(multiple(0) == 1.0);
  // the retrieval-detection entry recomputes to 1.33 from the published
  // triples (the printed 1.30 reflects rounded inputs)
  CHECK(multiple(1) == doctest::Approx(1.33).epsilon(8e-3));
  CHECK(multiple(2) == doctest::Approx(35.19).epsilon(3e-4));
  CHECK(multiple(3) == doctest::Approx(4.11).epsilon(3e-3));
  CHECK(multiple(4) == doctest::Approx(17.07).epsilon(1e-3));
  CHECK(multiple(5) == doctest::Approx(45.70).epsilon(1e-3));

  CHECK(rows[0]["gerr"].get<double>() == doctest::Approx(0.144).epsilon(1e-9));
  CHECK(rows[0]["rerr"].is_null());

  const auto again = fx.run(args);
  CHECK(again.out == r.out);
}

TEST_CASE("cli metrics: baseline-only input and zero-score rows") {
  CliFixture fx;
  const auto energies = fx.write(
      "e.csv",
      "label,total_energy_j,memory_tokens,writing_time_s,reading_time_s,e_real_j,"
      "response_tokens,latency_s\n"
      "base,,,,,9.6,1,\n"
      "zeroed,,,,,5.0,1,\n");
  const auto scores = fx.write("s.csv",
                               "label,relevance,accuracy,faithfulness,correctness\n"
                               "base,66.7,,100,29.3\n"
                               "zeroed,0,,50,50\n");
  const auto r = fx.run("metrics --energies " + energies.string() + " --scores " +
                        scores.string() + " --baseline base --no-meta");
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["rows"][0]["multiple_vs_baseline"].get<double>() == 1.0);
  CHECK(doc["rows"][1]["gerr"].is_null());
  CHECK(doc["rows"][1]["multiple_vs_baseline"].is_null());
  REQUIRE(doc["warnings"].size() >= 1);
  CHECK(r.err.find("warning:") != std::string::npos);
}

TEST_CASE("cli metrics: join failures exit 2") {
  CliFixture fx;
  const auto energies = fx.write(
      "e.csv",
      "label,total_energy_j,memory_tokens,writing_time_s,reading_time_s,e_real_j,"
      "response_tokens,latency_s\nbase,,,,,9.6,1,\n");
  const auto scores = fx.write("s.csv",
                               "label,relevance,accuracy,faithfulness,correctness\n"
                               "unknown,50,,50,50\n");
  CHECK(fx.run("metrics --energies " + energies.string() + " --scores " +
               scores.string()).exit_code == 2);

  const auto ok_scores = fx.write("s2.csv",
                                  "label,relevance,accuracy,faithfulness,correctness\n"
                                  "base,50,,50,50\n");
  CHECK(fx.run("metrics --energies " + energies.string() + " --scores " +
               ok_scores.string() + " --baseline missing").exit_code == 2);
}

namespace {

std::string constant_gpu_csv() {
  std::ostringstream out;
  out << "timestamp_s,power_mw\n";
  for (int t = 0; t <= 4; ++t) out << t << ",250000\n";
  return out.str();
}

}  // namespace

TEST_CASE("cli trace: constant power integrates to P * dt") {
  CliFixture fx;
  const auto gpu = fx.write("gpu.csv", constant_gpu_csv());
  const auto iv = fx.write("iv.csv", "label,start_s,end_s,t_in,t_out\nq1,0,4,100,1\n");
  const auto r = fx.run("trace --gpu " + gpu.string() + " --intervals " + iv.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "t_in,t_out,joules\n100,1,1000\n");
}

TEST_CASE("cli trace: wraparound counter with sidecar wrap range") {
  CliFixture fx;
  const auto cpu = fx.write("cpu.csv", "timestamp_s,energy_uj\n0,9500000\n1,500000\n");
  fx.write("cpu.csv.json", R"({"wrap_range_uj":10000000})");
  const auto iv = fx.write("iv.csv", "label,start_s,end_s,t_in,t_out\nq1,0,1,10,1\n");
  const auto r = fx.run("trace --cpu " + cpu.string() + " --intervals " + iv.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "t_in,t_out,joules\n10,1,1\n");

  // the flag takes precedence over the sidecar
  const auto r2 = fx.run("trace --cpu " + cpu.string() + " --wrap-range 10000000 --intervals " +
                         iv.string());
  CHECK(r2.out == r.out);
}

TEST_CASE("cli trace: missing wrap range and coverage errors") {
  CliFixture fx;
  const auto cpu = fx.write("c2.csv", "timestamp_s,energy_uj\n0,100\n1,200\n");
  const auto iv = fx.write("iv.csv", "label,start_s,end_s,t_in,t_out\nq1,0,1,1,1\n");
  CHECK(fx.run("trace --cpu " + cpu.string() + " --intervals " + iv.string()).exit_code ==
        2);

  const auto gpu = fx.write("gpu.csv", constant_gpu_csv());
  const auto beyond = fx.write("iv2.csv", "label,start_s,end_s,t_in,t_out\nq9,5,6,1,1\n");
  const auto r = fx.run("trace --gpu " + gpu.string() + " --intervals " + beyond.string());
  CHECK(r.exit_code == 4);
  CHECK(r.err.find("q9") != std::string::npos);

  CHECK(fx.run("trace --intervals " + iv.string()).exit_code == 2);
}

TEST_CASE("cli trace output pipes into fit") {
  CliFixture fx;
  const auto gpu = fx.write("gpu.csv", constant_gpu_csv());
  const auto iv = fx.write("iv.csv",
                           "label,start_s,end_s,t_in,t_out\n"
                           "a,0,1,10,1\nb,1,2,20,5\nc,2,3,40,2\nd,3,4,80,3\n");
  const auto samples_path = fx.dir() / "samples.csv";
  const auto r = fx.run("trace --gpu " + gpu.string() + " --intervals " + iv.string() +
                        " --out " + samples_path.string());
  REQUIRE(r.exit_code == 0);
  const auto fit = fx.run("fit " + samples_path.string() + " --model-id piped");
  CHECK(fit.exit_code == 0);
}

namespace {

std::string sweep_spec_json(const std::string& values) {
  return R"({
  "parameter": "top_k",
  "values": [)" + values + R"(],
  "node_size_tokens": 27.5,
  "base_workload": {"t_q":30,"t_qn":300,"t_m":640,"k":5,"c":5,"beta":0.3,"t_a":20},
  "variant_config": {"retrieval_energy_per_query": 5.0},
  "baseline_config": {"detection_enabled":false,"query_opt_enabled":false,
                      "rerank_enabled":false,"compression_enabled":false,
                      "retrieval_energy_per_query": 5.0}
})";
}

}  // namespace

TEST_CASE("cli sweep: two-point top_k sweep with increasing multiple") {
  CliFixture fx;
  const auto model = fx.write("model.json", kPaperModelJson);
  const auto spec = fx.write("spec.json", sweep_spec_json("5, 50"));
  const std::string args = "sweep --model " + model.string() + " --spec " + spec.string() +
                           " --format csv --no-meta";
  const auto r = fx.run(args);
  REQUIRE(r.exit_code == 0);

  std::istringstream lines(r.out);
  std::string header, row5, row50;
  std::getline(lines, header);
  std::getline(lines, row5);
  std::getline(lines, row50);
  CHECK(header.substr(0, 6) == "param,");
  CHECK(row5.substr(0, 2) == "5,");
  CHECK(row50.substr(0, 3) == "50,");
  const double m5 = std::strtod(row5.substr(row5.rfind(',') + 1).c_str(), nullptr);
  const double m50 = std::strtod(row50.substr(row50.rfind(',') + 1).c_str(), nullptr);
  CHECK(m5 > 1.0);
  CHECK(m50 > m5);

  const auto again = fx.run(args);
  CHECK(again.out == r.out);
}

TEST_CASE("cli sweep: identity point and invalid values") {
  CliFixture fx;
  const auto model = fx.write("model.json", kPaperModelJson);

  const auto identity = fx.write("id.json", R"({
    "parameter": "memory_tokens",
    "values": [640],
    "base_workload": {"t_q":30,"t_qn":300,"t_m":640,"k":5,"c":5,"beta":0.3,"t_a":20},
    "variant_config": {"retrieval_energy_per_query": 5.0},
    "baseline_config": {"retrieval_energy_per_query": 5.0}
  })");
  const auto r = fx.run("sweep --model " + model.string() + " --spec " + identity.string() +
                        " --format csv --no-meta");
  REQUIRE(r.exit_code == 0);
  const auto last_comma = r.out.rfind(',');
  CHECK(r.out.substr(last_comma + 1) == "1\n");

  const auto bad = fx.write("bad.json", R"({
    "parameter": "beta",
    "values": [1.5],
    "base_workload": {"t_q":30,"t_qn":300,"t_m":640,"k":5,"c":5,"beta":0.3,"t_a":20}
  })");
  CHECK(fx.run("sweep --model " + model.string() + " --spec " + bad.string()).exit_code ==
        2);
}

TEST_CASE("cli: unknown flags and missing subcommands exit 2") {
  CliFixture fx;
  CHECK(fx.run("").exit_code == 2);
  CHECK(fx.run("frobnicate").exit_code == 2);
  const auto model = fx.write("model.json", kPaperModelJson);
  CHECK(fx.run("simulate --model " + model.string()).exit_code == 2);  // missing workload
}
