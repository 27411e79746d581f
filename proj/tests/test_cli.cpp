// End-to-end tests that drive the installed CLI binary through a shell, the
// same way a user would. PARKCAST_BIN is injected by the build system.

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(PARKCAST_BIN) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
    r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const fs::path& scratch_root() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / "parkcast-cli-tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_file(const fs::path& p) {
  json j = json::parse(slurp(p), nullptr, false);
  REQUIRE(!j.is_discarded());
  return j;
}

std::size_t count_lines(const fs::path& p) {
  const std::string text = slurp(p);
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

// Shared synthetic corpus: 2 stations (synth02 capacity-limited), 6 weeks.
// Built once; later cases fit/predict/evaluate against it.
const fs::path& corpus_dir() {
  static const fs::path dir = [] {
    const fs::path d = scratch_root() / "corpus";
    const auto r =
        run("simulate --out " + d.string() + " --stations 2 --weeks 6 --seed 7");
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

fs::path corpus_csv() { return corpus_dir() / "corpus.csv"; }

const fs::path& tn_params_file() {
  static const fs::path file = [] {
    const fs::path out = scratch_root() / "fit_tn";
    const auto r = run("fit --input " + corpus_csv().string() + " --out " +
                       out.string() +
                       " --station synth01 --class weekday --model tn");
    REQUIRE(r.code == 0);
    return out / "params_synth01_weekday_tn.json";
  }();
  return file;
}

const fs::path& eval_dir() {
  static const fs::path dir = [] {
    const fs::path d = scratch_root() / "eval";
    const auto r = run("eval --input " + corpus_csv().string() + " --out " +
                       d.string() +
                       " --station synth01 --class weekday --model tn "
                       "--model avg --sweep-start 08:00 --sweep-end 10:00");
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("version and help exit zero") {
  const auto version = run("--version");
  CHECK(version.code == 0);
  CHECK(version.output.find("1.0.0") != std::string::npos);

  const auto help = run("--help");
  CHECK(help.code == 0);
  CHECK(help.output.find("simulate") != std::string::npos);
  CHECK(help.output.find("eval") != std::string::npos);

  const auto fit_help = run("fit --help");
  CHECK(fit_help.code == 0);
  CHECK(fit_help.output.find("--model") != std::string::npos);
}

TEST_CASE("bad invocations exit with code one") {
  CHECK(run("").code == 1);                    // missing subcommand
  CHECK(run("frobnicate").code == 1);          // unknown subcommand
  CHECK(run("simulate --bogus-flag").code == 1);
  CHECK(run("fit").code == 1);                 // missing required options
  CHECK(run("fit --input " + (scratch_root() / "absent.csv").string() +
            " --out " + (scratch_root() / "x1").string())
            .code == 1);                       // input must exist
  CHECK(run("fit --input " + corpus_csv().string() + " --out " +
            (scratch_root() / "x2").string() + " --model quadratic")
            .code == 1);                       // model not in the allowed set
  CHECK(run("simulate --out " + (scratch_root() / "x3").string() +
            " --stations 0")
            .code == 1);                       // below the allowed range
  CHECK(run("eval --input " + corpus_csv().string() + " --out " +
            (scratch_root() / "x4").string() + " --window 46")
            .code == 1);                       // window range is 1..45
}

TEST_CASE("malformed input data exits with code two") {
  const fs::path bad = scratch_root() / "bad.csv";
  std::ofstream(bad) << "station,timestamp,occupancy\nA,not-a-time,5\n";
  const auto r =
      run("ingest --input " + bad.string() + " --out " +
          (scratch_root() / "bad_out").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("parkcast:") != std::string::npos);
}

TEST_CASE("simulate writes corpus, truth, and manifest") {
  const fs::path& dir = corpus_dir();
  CHECK(fs::exists(dir / "corpus.csv"));
  CHECK(first_line(dir / "corpus.csv") == "station,timestamp,occupancy");

  const json truth = parse_file(dir / "truth.json");
  CHECK(truth.at("seed").get<std::uint64_t>() == 7);
  CHECK(truth.at("weeks").get<int>() == 6);
  REQUIRE(truth.at("stations").size() == 2);
  CHECK(truth.at("stations")[0].at("name") == "synth01");
  CHECK(truth.at("stations")[1].at("name") == "synth02");
  CHECK(truth.at("stations")[0].at("capacity").is_null());
  CHECK(truth.at("stations")[1].at("capacity").is_number());
  CHECK(truth.at("stations")[0].at("days").size() == 42);

  const json manifest = parse_file(dir / "manifest.json");
  CHECK(manifest.at("tool") == "parkcast");
  CHECK(manifest.at("version") == "1.0.0");
  CHECK(manifest.at("subcommand") == "simulate");
  CHECK(manifest.at("config").at("seed").get<std::uint64_t>() == 7);
  CHECK(manifest.at("config").at("stations").get<int>() == 2);
  const auto& outputs = manifest.at("outputs");
  CHECK(std::find(outputs.begin(), outputs.end(), json("corpus.csv")) !=
        outputs.end());
  CHECK(std::find(outputs.begin(), outputs.end(), json("truth.json")) !=
        outputs.end());
  CHECK(!manifest.at("generated_at").get<std::string>().empty());
}

TEST_CASE("ingest of its own output is idempotent") {
  const fs::path out1 = scratch_root() / "ingest1";
  const fs::path out2 = scratch_root() / "ingest2";
  REQUIRE(run("ingest --input " + corpus_csv().string() + " --out " +
              out1.string())
              .code == 0);
  CHECK(count_lines(out1 / "dropped.csv") == 1);  // header only
  // 2 stations x 42 complete days x 48 slots, plus the header.
  CHECK(count_lines(out1 / "cleaned.csv") == 1 + 2 * 42 * 48);

  REQUIRE(run("ingest --input " + (out1 / "cleaned.csv").string() + " --out " +
              out2.string())
              .code == 0);
  const bool same =
      slurp(out1 / "cleaned.csv") == slurp(out2 / "cleaned.csv");
  CHECK(same);
}

TEST_CASE("fit writes deterministic parameter documents") {
  const json doc = parse_file(tn_params_file());
  CHECK(doc.at("model") == "tn");
  CHECK(doc.at("station") == "synth01");
  CHECK(doc.at("day_class") == "weekday");
  CHECK(doc.at("station_max").get<double>() > 0.0);
  const json& params = doc.at("params");
  CHECK(params.at("mu_a").get<double>() > 0.0);
  CHECK(params.at("mu_a").get<double>() < 1.0);
  CHECK(params.at("mu_d").get<double>() > params.at("mu_a").get<double>());
  CHECK(params.at("sigma_a").get<double>() > 0.0);
  // 3 training weeks of Mon-Thu days survive the split.
  CHECK(doc.at("fit").at("n_profiles").get<int>() == 12);
  CHECK(doc.at("fit").at("non_interpretable").get<bool>() == false);

  // Refitting the same input is byte-identical.
  const fs::path again = scratch_root() / "fit_tn_again";
  REQUIRE(run("fit --input " + corpus_csv().string() + " --out " +
              again.string() +
              " --station synth01 --class weekday --model tn")
              .code == 0);
  const bool same = slurp(tn_params_file()) ==
                    slurp(again / "params_synth01_weekday_tn.json");
  CHECK(same);
}

TEST_CASE("fit produces a saturation document for the capacity station") {
  const fs::path out = scratch_root() / "fit_tnl";
  REQUIRE(run("fit --input " + corpus_csv().string() + " --out " +
              out.string() +
              " --station synth02 --class weekday --model tnl")
              .code == 0);
  const json doc = parse_file(out / "params_synth02_weekday_tnl.json");
  CHECK(doc.at("model") == "tnl");
  CHECK(doc.at("capacity_proxy").get<double>() > 0.0);
  const double mean_tau = doc.at("mean_tau").get<double>();
  CHECK(mean_tau > 0.0);
  CHECK(mean_tau <= 1.0);
  CHECK(doc.at("tau_per_day").size() == 12);
}

TEST_CASE("predict emits a grid for every matching day") {
  const fs::path out = scratch_root() / "predict";
  REQUIRE(run("predict --params " + tn_params_file().string() + " --input " +
              corpus_csv().string() + " --out " + out.string())
              .code == 0);
  CHECK(first_line(out / "predictions.csv") ==
        "station,date,slot,time,observed,predicted");
  // 6 weeks x 4 Mon-Thu days for synth01, 48 slots each.
  CHECK(count_lines(out / "predictions.csv") == 1 + 24 * 48);
  CHECK(count_lines(out / "days.csv") == 1 + 24);

  // Restricting to one date keeps a single day.
  const fs::path one = scratch_root() / "predict_one";
  REQUIRE(run("predict --params " + tn_params_file().string() + " --input " +
              corpus_csv().string() + " --out " + one.string() +
              " --date 2024-03-05")
              .code == 0);
  CHECK(count_lines(one / "days.csv") == 1 + 1);

  // A Saturday never matches a weekday parameter document.
  const auto mismatch =
      run("predict --params " + tn_params_file().string() + " --input " +
          corpus_csv().string() + " --out " +
          (scratch_root() / "predict_none").string() + " --date 2024-03-09");
  CHECK(mismatch.code == 2);
}

TEST_CASE("nowcast scores every matching day") {
  const fs::path out = scratch_root() / "nowcast";
  REQUIRE(run("nowcast --params " + tn_params_file().string() + " --input " +
              corpus_csv().string() + " --out " + out.string() +
              " --start 08:00 --window 2")
              .code == 0);
  CHECK(first_line(out / "nowcasts.csv") ==
        "station,date,day_class,start,window,model,error_pct");
  CHECK(count_lines(out / "nowcasts.csv") == 1 + 24);

  std::ifstream in(out / "nowcasts.csv");
  std::string line;
  std::getline(in, line);  // header
  REQUIRE(std::getline(in, line));
  std::stringstream ss(line);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() == 7);
  CHECK(fields[0] == "synth01");
  CHECK(fields[5] == "tn");
  CHECK(std::stod(fields[6]) >= 0.0);

  // A start late enough to push the window past the last slot is rejected.
  const auto late =
      run("nowcast --params " + tn_params_file().string() + " --input " +
          corpus_csv().string() + " --out " +
          (scratch_root() / "nowcast_late").string() +
          " --start 23:30 --window 2");
  CHECK(late.code == 1);
  CHECK(late.output.find("invalid option value") != std::string::npos);
}

TEST_CASE("predict and nowcast skip days that cannot be conditioned") {
  // Anomaly injection plants a stuck-sensor day (2024-04-03 at synth02 for
  // this seed); its constant prefix cannot be conditioned and must be skipped
  // with a warning instead of aborting the batch.
  const fs::path sim = scratch_root() / "anomalous";
  REQUIRE(run("simulate --out " + sim.string() +
              " --stations 2 --weeks 8 --seed 99 --anomalies")
              .code == 0);
  const fs::path fit = scratch_root() / "anomalous_fit";
  const auto fitted =
      run("fit --input " + (sim / "corpus.csv").string() + " --out " +
          fit.string() + " --station synth02 --class weekday --model tnl");
  REQUIRE(fitted.code == 0);
  CHECK(fitted.output.find("dropping constant day 2024-04-03") !=
        std::string::npos);
  const std::string params =
      (fit / "params_synth02_weekday_tnl.json").string();

  // 8 weeks x 4 Mon-Thu days, minus the one skipped stuck day.
  const fs::path pred = scratch_root() / "anomalous_predict";
  const auto predicted = run("predict --params " + params + " --input " +
                             (sim / "corpus.csv").string() + " --out " +
                             pred.string());
  CHECK(predicted.code == 0);
  CHECK(predicted.output.find("skipping 2024-04-03 at synth02") !=
        std::string::npos);
  CHECK(count_lines(pred / "days.csv") == 1 + 31);
  CHECK(count_lines(pred / "predictions.csv") == 1 + 31 * 48);

  const fs::path now = scratch_root() / "anomalous_nowcast";
  const auto scored = run("nowcast --params " + params + " --input " +
                          (sim / "corpus.csv").string() + " --out " +
                          now.string() + " --window 2");
  CHECK(scored.code == 0);
  CHECK(scored.output.find("skipping 2024-04-03 at synth02") !=
        std::string::npos);
  CHECK(count_lines(now / "nowcasts.csv") == 1 + 31);

  // When every matching day is skipped there is nothing to report.
  const auto none = run("predict --params " + params + " --input " +
                        (sim / "corpus.csv").string() + " --out " +
                        (scratch_root() / "anomalous_none").string() +
                        " --date 2024-04-03");
  CHECK(none.code == 2);
  CHECK(none.output.find("no matching day could be conditioned") !=
        std::string::npos);
}

TEST_CASE("eval writes instance table and summary document") {
  const fs::path& dir = eval_dir();
  CHECK(first_line(dir / "instances.csv") ==
        "station,date,day_class,start_slot,start,model,error_pct,"
        "persistence_fallback");
  // 12 test days x 5 sweep starts (08:00..10:00) x 2 models.
  CHECK(count_lines(dir / "instances.csv") == 1 + 12 * 5 * 2);

  const json ev = parse_file(dir / "eval.json");
  CHECK(ev.at("tool") == "parkcast");
  REQUIRE(ev.at("stations").size() == 1);
  const json& cls = ev.at("stations")[0].at("classes")[0];
  CHECK(cls.at("station") == "synth01");
  CHECK(cls.at("day_class") == "weekday");
  CHECK(cls.at("n_train") == 12);
  CHECK(cls.at("n_test") == 12);
  REQUIRE(cls.contains("tn"));
  CHECK(cls.contains("average"));
  CHECK(!cls.contains("tnl"));

  // The embedded document matches a standalone fit of the same input.
  const json fitted = parse_file(tn_params_file());
  CHECK(cls.at("tn") == fitted);

  const json& sums = cls.at("sweep").at("summaries");
  REQUIRE(sums.size() == 2);
  for (const auto& s : sums) {
    CHECK((s.at("model") == "tn" || s.at("model") == "average"));
    CHECK(s.at("n").get<int>() == 60);
    CHECK(s.at("median").get<double>() >= 0.0);
  }
  const json& wins = cls.at("sweep").at("win_rates");
  REQUIRE(wins.size() == 1);
  CHECK(wins[0].at("a") == "tn");
  CHECK(wins[0].at("b") == "average");
  CHECK(wins[0].at("n_pairs").get<int>() == 60);
  const double rate = wins[0].at("win_rate_a").get<double>();
  CHECK(rate >= 0.0);
  CHECK(rate <= 1.0);

  const json manifest = parse_file(dir / "manifest.json");
  CHECK(manifest.at("subcommand") == "eval");
}

TEST_CASE("report renders tables and figures from an evaluation") {
  const fs::path out = scratch_root() / "report";
  REQUIRE(run("report --input " + eval_dir().string() + " --out " +
              out.string())
              .code == 0);
  CHECK(count_lines(out / "tables" / "params_tn.csv") == 2);
  CHECK(count_lines(out / "tables" / "params_tnl.csv") == 1);  // header only
  CHECK(count_lines(out / "tables" / "nowcast_medians.csv") == 3);
  CHECK(count_lines(out / "tables" / "winrates.csv") == 2);
  CHECK(count_lines(out / "tables" / "loss.csv") == 3);
  CHECK(count_lines(out / "tables" / "fit_error.csv") == 3);
  // observed + tn + average mean curves, 48 slots each.
  CHECK(count_lines(out / "figures" / "curves_synth01_weekday.csv") ==
        1 + 3 * 48);
  CHECK(count_lines(out / "figures" / "nowcast_errors_synth01_weekday.csv") ==
        1 + 120);
  const json manifest = parse_file(out / "manifest.json");
  CHECK(manifest.at("subcommand") == "report");

  // Pointing report at a directory without an evaluation is a data error.
  const auto missing =
      run("report --input " + scratch_root().string() + " --out " +
          (scratch_root() / "report_none").string());
  CHECK(missing.code == 2);
}

TEST_CASE("config files merge beneath explicit flags") {
  const fs::path cfg = scratch_root() / "sim.json";
  std::ofstream(cfg) << R"({"stations": 2, "weeks": 1, "seed": 5})";
  const fs::path out = scratch_root() / "sim_cfg";
  REQUIRE(run("simulate --config " + cfg.string() + " --seed 11 --out " +
              out.string())
              .code == 0);
  const json manifest = parse_file(out / "manifest.json");
  CHECK(manifest.at("config").at("stations").get<int>() == 2);   // from file
  CHECK(manifest.at("config").at("weeks").get<int>() == 1);      // from file
  CHECK(manifest.at("config").at("seed").get<std::uint64_t>() == 11);  // CLI wins

  const fs::path unknown = scratch_root() / "unknown.json";
  std::ofstream(unknown) << R"({"wibble": 3})";
  const auto bad_key = run("simulate --config " + unknown.string() + " --out " +
                           (scratch_root() / "sim_bad").string());
  CHECK(bad_key.code == 1);
  CHECK(bad_key.output.find("unknown config key") != std::string::npos);

  CHECK(run("simulate --config " + (scratch_root() / "absent.json").string() +
            " --out " + (scratch_root() / "sim_absent").string())
            .code == 1);

  // Values injected from the file still pass through the range validators.
  const fs::path invalid = scratch_root() / "invalid.json";
  std::ofstream(invalid) << R"({"weeks": 0})";
  CHECK(run("simulate --config " + invalid.string() + " --out " +
            (scratch_root() / "sim_invalid").string())
            .code == 1);
}
