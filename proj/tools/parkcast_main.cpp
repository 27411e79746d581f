// Command-line front end: ingest -> fit -> eval -> predict/nowcast ->
// simulate -> report. Every flag can also come from a JSON config file
// (--config); command-line values win. Each command writes a manifest.json
// next to its outputs; the generated_at field is the only value allowed to
// differ between identical runs.

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parkcast/baselines.hpp"
#include "parkcast/data.hpp"
#include "parkcast/errors.hpp"
#include "parkcast/evaluation.hpp"
#include "parkcast/fitting.hpp"
#include "parkcast/forecast.hpp"
#include "parkcast/grid.hpp"
#include "parkcast/log.hpp"
#include "parkcast/models.hpp"
#include "parkcast/serialize.hpp"
#include "parkcast/simulator.hpp"
#include "parkcast/truncnorm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace parkcast;

namespace {

constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// JSON config files: an object whose keys are long option names without the
// leading dashes, e.g. {"input": "data.csv", "test-weeks": 2}.

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

/// Rewrites the argument list, appending one token pair per config key whose
/// flag was not already given on the command line. Injected values then flow
/// through the same validators and required-option checks as typed ones, and
/// explicit flags always win.
std::vector<std::string> expand_config(const CLI::App& app,
                                       std::vector<std::string> args) {
  std::string sub_name;
  for (const auto& a : args)
    if (!a.empty() && a.front() != '-') {
      sub_name = a;
      break;
    }
  if (sub_name.empty()) return args;
  const CLI::App* sub = app.get_subcommand_no_throw(sub_name);
  if (sub == nullptr) return args;

  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw InvalidConfig("config file must be a JSON object of flag values");

  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (sub->get_option_no_throw(flag) == nullptr)
      throw InvalidConfig("unknown config key '" + key + "' for " + sub_name);
    bool on_cli = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) on_cli = true;
    if (on_cli) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& el : value) {
        args.push_back(flag);
        args.push_back(json_scalar_to_string(el));
      }
    } else {
      args.push_back(flag);
      args.push_back(json_scalar_to_string(value));
    }
  }
  return args;
}

std::string g_config_path;  // bound by every subcommand, read via expand_config

void add_config_option(CLI::App* sub) {
  sub->add_option("--config", g_config_path,
                  "JSON file mirroring the flags; command-line values win")
      ->check(CLI::ExistingFile);
}

// ---------------------------------------------------------------------------
// Small formatting / hashing helpers.

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(
        std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.'
            ? c
            : '_');
  return out;
}

// ---------------------------------------------------------------------------
// Output directory with a written-files ledger feeding the manifest.

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  std::ofstream open(const std::string& relative) {
    const fs::path p = dir_ / relative;
    if (p.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(p.parent_path(), ec);
      if (ec)
        throw IoError("cannot create " + p.parent_path().string() + ": " +
                      ec.message());
    }
    std::ofstream out(p);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    written_.push_back(relative);
    return out;
  }

  void write_manifest(const std::string& subcommand, const json& config,
                      const std::vector<std::string>& input_paths) {
    json inputs = json::array();
    for (const auto& path : input_paths) {
      std::error_code ec;
      const auto bytes = fs::file_size(path, ec);
      inputs.push_back(json{{"path", path},
                            {"bytes", ec ? 0 : static_cast<std::uint64_t>(bytes)}});
    }
    written_.push_back("manifest.json");
    const json m{
        {"tool", "parkcast"},
        {"version", kToolVersion},
        {"subcommand", subcommand},
        {"config", config},
        {"config_hash", hex64(fnv1a64(config.dump()))},
        {"inputs", inputs},
        {"outputs", written_},
        {"generated_at", iso_utc_now()},
    };
    std::ofstream out(dir_ / "manifest.json");
    if (!out) throw IoError("cannot write manifest.json");
    out << m.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------
// Shared pipeline pieces.

std::vector<RawSeries> load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return ingest_csv(in);
}

ExclusionList load_exclusions(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return ExclusionList::from_json(in);
}

struct Cleaned {
  std::vector<OccupancyProfile> profiles;  // raw counts, station-sorted
  std::vector<DroppedDay> dropped;
  std::vector<std::string> stations;
};

Cleaned clean_input(const std::string& input, const std::string& exclusions) {
  const auto series = load_series(input);
  const auto excl = load_exclusions(exclusions);
  Cleaned out;
  for (const auto& s : series) {
    auto sliced = slice_days(s, excl);
    for (auto& p : sliced.profiles) out.profiles.push_back(std::move(p));
    for (auto& d : sliced.dropped) out.dropped.push_back(std::move(d));
    out.stations.push_back(s.station);
  }
  return out;
}

std::vector<OccupancyProfile> station_profiles(
    std::span<const OccupancyProfile> all, const std::string& station) {
  std::vector<OccupancyProfile> out;
  for (const auto& p : all)
    if (p.station == station) out.push_back(p);
  return out;
}

std::vector<std::string> pick_stations(const Cleaned& data,
                                       const std::string& wanted) {
  if (wanted.empty()) return data.stations;
  for (const auto& s : data.stations)
    if (s == wanted) return {wanted};
  throw InvalidConfig("station '" + wanted + "' not present in the input");
}

std::vector<DayClass> selected_classes(const std::string& flag) {
  if (flag.empty())
    return {DayClass::Weekday, DayClass::Friday, DayClass::Weekend};
  return {day_class_from_string(flag)};
}

bool is_flat(const OccupancyProfile& p) {
  for (double v : p.values)
    if (v != p.values.front()) return false;
  return true;
}

/// Constant days carry no shape and cannot be normalised; the pipeline
/// drops them from training with a warning instead of aborting the run.
std::vector<OccupancyProfile> drop_flat(std::vector<OccupancyProfile> in,
                                        const char* context) {
  std::vector<OccupancyProfile> out;
  out.reserve(in.size());
  for (auto& p : in) {
    if (is_flat(p)) {
      log_warn("dropping constant day " + format_date(p.date) + " at " +
               p.station + " from " + context);
      continue;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<OccupancyProfile> normalised_copy(
    std::span<const OccupancyProfile> in, Normalisation mode) {
  std::vector<OccupancyProfile> out(in.begin(), in.end());
  for (auto& p : out) normalise(p, mode, BaselineMode::SubtractDayMin);
  return out;
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const CLI::Validator HhmmSlot(
    [](std::string& s) -> std::string {
      try {
        slot_of_hhmm(s);
      } catch (const Error& e) {
        return e.what();
      }
      return {};
    },
    "HH:MM on a 30-minute boundary", "HHMM");

const CLI::Validator IsoDate(
    [](std::string& s) -> std::string {
      try {
        parse_date(s);
      } catch (const Error& e) {
        return e.what();
      }
      return {};
    },
    "YYYY-MM-DD", "DATE");

// ---------------------------------------------------------------------------
// ingest

struct IngestOpts {
  std::string input, exclusions, out;
};

int cmd_ingest(const IngestOpts& o) {
  const Cleaned data = clean_input(o.input, o.exclusions);
  OutputSet outs(o.out);

  {
    auto csv = outs.open("cleaned.csv");
    csv << "station,timestamp,occupancy\n";
    for (const auto& p : data.profiles) {
      for (int slot = 1; slot <= kSlotsPerDay; ++slot) {
        const auto ts = std::chrono::sys_seconds{p.date} +
                        std::chrono::minutes{30 * slot};
        csv << p.station << ',' << format_timestamp(ts) << ','
            << std::llround(p.values[slot - 1]) << '\n';
      }
    }
  }
  {
    auto csv = outs.open("dropped.csv");
    csv << "station,date,reason\n";
    for (const auto& d : data.dropped)
      csv << d.station << ',' << format_date(d.date) << ','
          << csv_quote(d.reason) << '\n';
  }

  log_info("kept " + std::to_string(data.profiles.size()) + " days, dropped " +
           std::to_string(data.dropped.size()));
  json cfg{{"input", o.input}, {"exclusions", o.exclusions}, {"out", o.out}};
  std::vector<std::string> inputs{o.input};
  if (!o.exclusions.empty()) inputs.push_back(o.exclusions);
  outs.write_manifest("ingest", cfg, inputs);
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
  std::string input, exclusions, out, station, day_class;
  std::string model = "tn";
  int test_weeks = 3;
  int jobs = 0;
  double max_occupancy = 0.0;  // 0 = derive from the data
};

int cmd_fit(const FitOpts& o) {
  const Cleaned data = clean_input(o.input, o.exclusions);
  OutputSet outs(o.out);
  const auto stations = pick_stations(data, o.station);
  const auto classes = selected_classes(o.day_class);

  for (const auto& st : stations) {
    const auto all_st = station_profiles(data.profiles, st);
    const SplitResult split = split_train_test(all_st, o.test_weeks, classes);
    const auto train = drop_flat(split.train, "training");
    const double station_max =
        o.max_occupancy > 0 ? o.max_occupancy : max_occupancy(all_st);
    const double cap =
        o.max_occupancy > 0 ? o.max_occupancy : max_occupancy(train);

    for (const DayClass cls : classes) {
      const auto sel = select_profiles(train, st, cls);
      FitOptions fo;
      fo.jobs = o.jobs;
      const std::string file = "params_" + sanitize_name(st) + "_" +
                               to_string(cls) + "_" + o.model + ".json";
      if (o.model == "tn") {
        const auto norm = normalised_copy(sel, Normalisation::Area);
        const TnDocument doc{st, cls, station_max, fit_tn(norm, fo)};
        auto f = outs.open(file);
        write_document(f, doc);
      } else {
        const auto norm = normalised_copy(sel, Normalisation::Max);
        const TnlDocument doc{st, cls, station_max, cap, fit_tnl(norm, fo)};
        auto f = outs.open(file);
        write_document(f, doc);
      }
      log_info("fitted " + o.model + " for " + st + " / " + to_string(cls));
    }
  }

  json cfg{{"input", o.input},      {"exclusions", o.exclusions},
           {"out", o.out},          {"station", o.station},
           {"class", o.day_class},  {"model", o.model},
           {"test-weeks", o.test_weeks},
           {"jobs", o.jobs},        {"max-occupancy", o.max_occupancy}};
  std::vector<std::string> inputs{o.input};
  if (!o.exclusions.empty()) inputs.push_back(o.exclusions);
  outs.write_manifest("fit", cfg, inputs);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string input, exclusions, out, station, day_class;
  std::vector<std::string> models;  // default: all four
  int test_weeks = 3;
  int window = 2;
  std::string sweep_start = "07:00";
  std::string sweep_end = "23:00";
  int jobs = 0;
  double max_occupancy = 0.0;
};

struct ClassEval {
  std::string station;
  DayClass cls = DayClass::Weekday;
  double station_max = 0.0;
  double capacity_proxy = 0.0;
  int n_train = 0;
  int n_test = 0;
  std::optional<TnFit> tn;
  std::optional<TnlFit> tnl;
  std::optional<AverageProfile> avg;
  double avg_total_loss = 0.0, avg_loss_per_day = 0.0, avg_beta2 = 0.0;
  std::vector<FitErrorReport> fit_errors;
  std::vector<SweepInstance> instances;
  std::vector<std::pair<std::string, DistSummary>> summaries;
  struct WinRow {
    std::string a, b;
    double rate = 0.0;
    int n = 0;
  };
  std::vector<WinRow> wins;
  std::vector<double> observed_mean;
  std::vector<std::pair<std::string, std::vector<double>>> curve_mean;
};

ClassEval eval_class(const std::string& station, DayClass cls,
                     const std::vector<OccupancyProfile>& train_sel,
                     const std::vector<OccupancyProfile>& test_sel,
                     double station_max, double cap,
                     const std::set<std::string>& models, const EvalOpts& o) {
  ClassEval r;
  r.station = station;
  r.cls = cls;
  r.station_max = station_max;
  r.capacity_proxy = cap;
  r.n_train = static_cast<int>(train_sel.size());
  r.n_test = static_cast<int>(test_sel.size());

  FitOptions fo;
  fo.jobs = o.jobs;
  std::optional<TnModel> tn_model, tnl_model;
  std::vector<OccupancyProfile> area_train;
  if (models.count("tn") || models.count("avg"))
    area_train = normalised_copy(train_sel, Normalisation::Area);

  if (models.count("tn")) {
    r.tn = fit_tn(area_train, fo);
    tn_model.emplace(r.tn->params);
  }
  if (models.count("tnl")) {
    const auto max_train = normalised_copy(train_sel, Normalisation::Max);
    r.tnl = fit_tnl(max_train, fo);
    tnl_model.emplace(r.tnl->params);
  }
  if (models.count("avg")) {
    r.avg = build_average(area_train, cls);
    const LossBreakdown lb = loss(area_train, r.avg->values);
    r.avg_total_loss = lb.total;
    r.avg_loss_per_day = lb.per_day;
    r.avg_beta2 =
        lb.total / (static_cast<double>(area_train.size()) * kSlotsPerDay);
  }

  std::vector<std::pair<std::string, CountCurveFn>> curves;
  if (r.tn) curves.emplace_back("tn", tn_count_curve(r.tn->params));
  if (r.tnl)
    curves.emplace_back("tnl", tnl_count_curve(r.tnl->params, r.tnl->mean_tau));
  if (r.avg) curves.emplace_back("average", average_count_curve(*r.avg));

  if (!test_sel.empty()) {
    for (const auto& [name, fn] : curves)
      r.fit_errors.push_back(fit_error(test_sel, name, fn, station_max));

    r.observed_mean.assign(kSlotsPerDay, 0.0);
    for (const auto& day : test_sel)
      for (int s = 0; s < kSlotsPerDay; ++s)
        r.observed_mean[s] += day.values[s] / r.n_test;
    for (const auto& [name, fn] : curves) {
      std::vector<double> mean(kSlotsPerDay, 0.0);
      for (const auto& day : test_sel) {
        const auto curve = fn(day);
        for (int s = 0; s < kSlotsPerDay; ++s) mean[s] += curve[s] / r.n_test;
      }
      r.curve_mean.emplace_back(name, std::move(mean));
    }
  }

  std::optional<LinRegCache> cache;
  if (models.count("lreg")) cache.emplace(train_sel);
  SweepModels sm;
  sm.tn = tn_model ? &*tn_model : nullptr;
  sm.tnl = tnl_model ? &*tnl_model : nullptr;
  sm.capacity_proxy = cap;
  sm.average = r.avg ? &*r.avg : nullptr;
  sm.linreg = cache ? &*cache : nullptr;

  if (!test_sel.empty() &&
      (sm.tn != nullptr || sm.tnl != nullptr || sm.average != nullptr ||
       sm.linreg != nullptr)) {
    SweepConfig sc;
    sc.start_lo = slot_of_hhmm(o.sweep_start);
    sc.start_hi = slot_of_hhmm(o.sweep_end);
    sc.window = o.window;
    sc.station_max = station_max;
    sc.jobs = o.jobs;
    r.instances = nowcast_sweep(test_sel, sm, sc);
  }

  std::map<std::string, std::vector<double>> by_model;
  for (const auto& inst : r.instances)
    by_model[inst.model].push_back(inst.error_pct);
  for (const auto& [name, errors] : by_model)
    r.summaries.emplace_back(name, summarise(errors));
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"tnl", "tn"},     {"tnl", "average"},    {"tnl", "linreg"},
      {"tn", "average"}, {"tn", "linreg"},      {"average", "linreg"}};
  for (const auto& [a, b] : pairs) {
    const auto ia = by_model.find(a);
    const auto ib = by_model.find(b);
    if (ia == by_model.end() || ib == by_model.end()) continue;
    r.wins.push_back({a, b, win_rate(ia->second, ib->second),
                      static_cast<int>(ia->second.size())});
  }
  return r;
}

json class_to_json(const ClassEval& r) {
  json j{{"station", r.station},
         {"day_class", to_string(r.cls)},
         {"station_max", r.station_max},
         {"capacity_proxy", r.capacity_proxy},
         {"n_train", r.n_train},
         {"n_test", r.n_test}};
  if (r.tn) {
    const TnDocument d{r.station, r.cls, r.station_max, *r.tn};
    j["tn"] = json::parse(to_json(d));
  }
  if (r.tnl) {
    const TnlDocument d{r.station, r.cls, r.station_max, r.capacity_proxy,
                        *r.tnl};
    j["tnl"] = json::parse(to_json(d));
  }
  if (r.avg)
    j["average"] = json{{"n_days", r.avg->n_days},
                        {"values", r.avg->values},
                        {"total_loss", r.avg_total_loss},
                        {"loss_per_day", r.avg_loss_per_day},
                        {"beta2", r.avg_beta2}};
  json fe = json::array();
  for (const auto& f : r.fit_errors)
    fe.push_back(json{{"model", f.model},
                      {"n_days", f.n_days},
                      {"overall_mean_pct", f.overall_mean_pct},
                      {"slot_mean_pct", f.slot_mean_pct},
                      {"slot_std_pct", f.slot_std_pct}});
  j["fit_errors"] = fe;
  json sums = json::array();
  for (const auto& [name, s] : r.summaries)
    sums.push_back(json{{"model", name},
                        {"n", s.n},
                        {"mean", s.mean},
                        {"median", s.median},
                        {"q25", s.q25},
                        {"q75", s.q75}});
  json wins = json::array();
  for (const auto& w : r.wins)
    wins.push_back(json{
        {"a", w.a}, {"b", w.b}, {"win_rate_a", w.rate}, {"n_pairs", w.n}});
  j["sweep"] = json{{"summaries", sums}, {"win_rates", wins}};
  json curves = json::object();
  if (!r.observed_mean.empty()) curves["observed"] = r.observed_mean;
  for (const auto& [name, vals] : r.curve_mean) curves[name] = vals;
  j["figure_curves"] = curves;
  return j;
}

int cmd_eval(const EvalOpts& o) {
  const Cleaned data = clean_input(o.input, o.exclusions);
  OutputSet outs(o.out);
  const auto stations = pick_stations(data, o.station);
  const auto classes = selected_classes(o.day_class);
  std::set<std::string> models(o.models.begin(), o.models.end());
  if (models.empty()) models = {"tn", "tnl", "avg", "lreg"};

  auto inst_csv = outs.open("instances.csv");
  inst_csv << "station,date,day_class,start_slot,start,model,error_pct,"
              "persistence_fallback\n";

  json stations_json = json::array();
  for (const auto& st : stations) {
    const auto all_st = station_profiles(data.profiles, st);
    const SplitResult split = split_train_test(all_st, o.test_weeks, classes);
    const auto train = drop_flat(split.train, "training");
    const double station_max =
        o.max_occupancy > 0 ? o.max_occupancy : max_occupancy(all_st);
    const double cap =
        o.max_occupancy > 0 ? o.max_occupancy : max_occupancy(train);

    json classes_json = json::array();
    for (const DayClass cls : classes) {
      const auto train_sel = select_profiles(train, st, cls);
      const auto test_sel = select_profiles(split.test, st, cls);
      const ClassEval r =
          eval_class(st, cls, train_sel, test_sel, station_max, cap, models, o);
      classes_json.push_back(class_to_json(r));
      for (const auto& inst : r.instances)
        inst_csv << inst.station << ',' << format_date(inst.date) << ','
                 << to_string(inst.day_class) << ',' << inst.start_slot << ','
                 << format_hhmm(grid_time(inst.start_slot)) << ','
                 << inst.model << ',' << fmt_num(inst.error_pct) << ','
                 << (inst.persistence_fallback ? 1 : 0) << '\n';
      log_info("evaluated " + st + " / " + to_string(cls));
    }
    stations_json.push_back(json{{"station", st},
                                 {"station_max", station_max},
                                 {"capacity_proxy", cap},
                                 {"classes", classes_json}});
  }

  {
    auto ej = outs.open("eval.json");
    ej << json{{"tool", "parkcast"},
               {"version", kToolVersion},
               {"stations", stations_json}}
              .dump(2)
       << "\n";
  }

  json cfg{{"input", o.input},
           {"exclusions", o.exclusions},
           {"out", o.out},
           {"station", o.station},
           {"class", o.day_class},
           {"model", json(std::vector<std::string>(models.begin(), models.end()))},
           {"test-weeks", o.test_weeks},
           {"window", o.window},
           {"sweep-start", o.sweep_start},
           {"sweep-end", o.sweep_end},
           {"jobs", o.jobs},
           {"max-occupancy", o.max_occupancy}};
  std::vector<std::string> inputs{o.input};
  if (!o.exclusions.empty()) inputs.push_back(o.exclusions);
  outs.write_manifest("eval", cfg, inputs);
  return 0;
}

// ---------------------------------------------------------------------------
// predict / nowcast

struct PredictOpts {
  std::string params, input, exclusions, out, start = "08:00", date;
  double max_occupancy = 0.0;
};

std::vector<OccupancyProfile> matching_days(const Cleaned& data,
                                            const std::string& station,
                                            DayClass cls,
                                            const std::string& date) {
  auto days = select_profiles(data.profiles, station, cls);
  if (!date.empty()) {
    const auto wanted = parse_date(date);
    std::vector<OccupancyProfile> filtered;
    for (auto& d : days)
      if (d.date == wanted) filtered.push_back(std::move(d));
    days = std::move(filtered);
  }
  if (days.empty())
    throw InsufficientData("no days match the requested station/class/date");
  return days;
}

int cmd_predict(const PredictOpts& o) {
  const std::string text = slurp_file(o.params);
  const std::string tag = document_model_tag(text);
  const Cleaned data = clean_input(o.input, o.exclusions);
  OutputSet outs(o.out);
  const int h = slot_of_hhmm(o.start);

  auto grid_csv = outs.open("predictions.csv");
  grid_csv << "station,date,slot,time,observed,predicted\n";
  auto days_csv = outs.open("days.csv");
  days_csv << "station,date,model,start,beta0,beta1,window_end,low_signal,"
              "tau_i,t_l,excess\n";

  const auto emit = [&](const OccupancyProfile& day, const char* model,
                        const PredictionFit& fit,
                        const std::vector<double>& grid) {
    for (int s = 0; s < kSlotsPerDay; ++s)
      grid_csv << day.station << ',' << format_date(day.date) << ',' << s + 1
               << ',' << format_hhmm(grid_time(s + 1)) << ','
               << fmt_num(day.values[s]) << ',' << fmt_num(grid[s]) << '\n';
    days_csv << day.station << ',' << format_date(day.date) << ',' << model
             << ',' << o.start << ',' << fmt_num(fit.beta0) << ','
             << fmt_num(fit.beta1) << ',' << fit.window_end << ','
             << (fit.low_signal ? 1 : 0) << ','
             << (fit.tau_i ? fmt_num(*fit.tau_i) : std::string{}) << ','
             << (fit.t_l ? format_hhmm(*fit.t_l) : std::string{}) << ','
             << (fit.excess ? fmt_num(*fit.excess) : std::string{}) << '\n';
  };

  // A day whose observed prefix cannot be conditioned (a stuck sensor gives
  // a one-slot window, a pre-dawn prefix a constant curve) is skipped with a
  // warning rather than aborting the batch; only an empty batch is an error.
  std::size_t emitted = 0;
  const auto skip_note = [](const OccupancyProfile& day, const char* what) {
    log_warn("skipping " + format_date(day.date) + " at " + day.station +
             ": " + what);
  };

  if (tag == "tn") {
    const TnDocument doc = parse_tn_document(text);
    const TnModel model(doc.fit.params);
    for (const auto& day :
         matching_days(data, doc.station, doc.day_class, o.date)) {
      const std::span<const double> prefix(day.values.data(), h);
      try {
        const PredictionFit fit = condition_tn(prefix, model);
        emit(day, "tn", fit, predict_tn_grid(fit, model));
        ++emitted;
      } catch (const InsufficientData& e) {
        skip_note(day, e.what());
      } catch (const SingularFit& e) {
        skip_note(day, e.what());
      }
    }
  } else if (tag == "tnl") {
    const TnlDocument doc = parse_tnl_document(text);
    const TnModel model(doc.fit.params);
    const double cap =
        o.max_occupancy > 0 ? o.max_occupancy : doc.capacity_proxy;
    for (const auto& day :
         matching_days(data, doc.station, doc.day_class, o.date)) {
      const std::span<const double> prefix(day.values.data(), h);
      try {
        const PredictionFit fit = condition_tnl(prefix, model, cap);
        emit(day, "tnl", fit, predict_tnl_grid(fit, model));
        ++emitted;
      } catch (const InsufficientData& e) {
        skip_note(day, e.what());
      } catch (const SingularFit& e) {
        skip_note(day, e.what());
      }
    }
  } else {
    throw ParseError("unsupported model document '" + tag + "'");
  }
  if (emitted == 0)
    throw InsufficientData("no matching day could be conditioned");

  json cfg{{"params", o.params},  {"input", o.input},
           {"exclusions", o.exclusions}, {"out", o.out},
           {"start", o.start},    {"date", o.date},
           {"max-occupancy", o.max_occupancy}};
  std::vector<std::string> inputs{o.params, o.input};
  if (!o.exclusions.empty()) inputs.push_back(o.exclusions);
  outs.write_manifest("predict", cfg, inputs);
  return 0;
}

struct NowcastOpts {
  std::string params, input, exclusions, out, start = "08:00", date;
  int window = 2;
  double max_occupancy = 0.0;
};

int cmd_nowcast(const NowcastOpts& o) {
  const std::string text = slurp_file(o.params);
  const std::string tag = document_model_tag(text);
  const Cleaned data = clean_input(o.input, o.exclusions);
  const int h = slot_of_hhmm(o.start);
  if (h < 3 || h + o.window > kSlotsPerDay)
    throw InvalidConfig("start/window put the nowcast outside slots 3..48");

  OutputSet outs(o.out);
  auto csv = outs.open("nowcasts.csv");
  csv << "station,date,day_class,start,window,model,error_pct\n";

  const auto emit = [&](const OccupancyProfile& day, const char* model,
                        double error) {
    csv << day.station << ',' << format_date(day.date) << ','
        << to_string(day.day_class) << ',' << o.start << ',' << o.window << ','
        << model << ',' << fmt_num(error) << '\n';
  };

  // Same skip policy as predict: a day whose prefix cannot be conditioned is
  // dropped with a warning, and only an empty batch aborts the run.
  std::size_t emitted = 0;
  const auto skip_note = [](const OccupancyProfile& day, const char* what) {
    log_warn("skipping " + format_date(day.date) + " at " + day.station +
             ": " + what);
  };

  if (tag == "tn") {
    const TnDocument doc = parse_tn_document(text);
    const TnModel model(doc.fit.params);
    const double max_t =
        o.max_occupancy > 0 ? o.max_occupancy : doc.station_max;
    for (const auto& day :
         matching_days(data, doc.station, doc.day_class, o.date)) {
      const std::span<const double> prefix(day.values.data(), h);
      try {
        const PredictionFit fit = condition_tn(prefix, model);
        const auto grid = predict_tn_grid(fit, model);
        emit(day, "tn", nowcast_error(day.values, grid, h, o.window, max_t));
        ++emitted;
      } catch (const InsufficientData& e) {
        skip_note(day, e.what());
      } catch (const SingularFit& e) {
        skip_note(day, e.what());
      }
    }
  } else if (tag == "tnl") {
    const TnlDocument doc = parse_tnl_document(text);
    const TnModel model(doc.fit.params);
    const double max_t =
        o.max_occupancy > 0 ? o.max_occupancy : doc.station_max;
    const double cap =
        o.max_occupancy > 0 ? o.max_occupancy : doc.capacity_proxy;
    for (const auto& day :
         matching_days(data, doc.station, doc.day_class, o.date)) {
      const std::span<const double> prefix(day.values.data(), h);
      try {
        const PredictionFit fit = condition_tnl(prefix, model, cap);
        const auto grid = predict_tnl_grid(fit, model);
        emit(day, "tnl", nowcast_error(day.values, grid, h, o.window, max_t));
        ++emitted;
      } catch (const InsufficientData& e) {
        skip_note(day, e.what());
      } catch (const SingularFit& e) {
        skip_note(day, e.what());
      }
    }
  } else {
    throw ParseError("unsupported model document '" + tag + "'");
  }
  if (emitted == 0)
    throw InsufficientData("no matching day could be conditioned");

  json cfg{{"params", o.params},    {"input", o.input},
           {"exclusions", o.exclusions}, {"out", o.out},
           {"start", o.start},      {"date", o.date},
           {"window", o.window},    {"max-occupancy", o.max_occupancy}};
  std::vector<std::string> inputs{o.params, o.input};
  if (!o.exclusions.empty()) inputs.push_back(o.exclusions);
  outs.write_manifest("nowcast", cfg, inputs);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::string out;
  int stations = 4;
  int weeks = 12;
  std::uint64_t seed = 0;
  std::string start_date = "2024-03-04";  // a Monday
  bool anomalies = false;
  int jobs = 0;
};

int cmd_simulate(const SimulateOpts& o) {
  CorpusConfig cc;
  cc.stations = default_station_set(o.stations, o.seed);
  cc.start_date = parse_date(o.start_date);
  cc.weeks = o.weeks;
  cc.seed = o.seed;
  cc.inject_anomalies = o.anomalies;
  cc.jobs = o.jobs;
  const Corpus corpus = simulate_corpus(cc);

  OutputSet outs(o.out);
  {
    auto csv = outs.open("corpus.csv");
    write_corpus_csv(corpus, csv);
  }
  {
    auto truth = outs.open("truth.json");
    write_corpus_sidecar(corpus, truth);
  }

  json cfg{{"out", o.out},
           {"stations", o.stations},
           {"weeks", o.weeks},
           {"seed", o.seed},
           {"start-date", o.start_date},
           {"anomalies", o.anomalies},
           {"jobs", o.jobs}};
  outs.write_manifest("simulate", cfg, {});
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
  std::string input, out;
};

struct InstanceRow {
  std::string station, day_class, date, start, model;
  int start_slot = 0;
  double error_pct = 0.0;
};

std::vector<InstanceRow> read_instances(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<InstanceRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 8) throw ParseError("bad instances.csv row: " + line);
    InstanceRow r;
    r.station = fields[0];
    r.date = fields[1];
    r.day_class = fields[2];
    r.start_slot = std::stoi(fields[3]);
    r.start = fields[4];
    r.model = fields[5];
    r.error_pct = std::stod(fields[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

int cmd_report(const ReportOpts& o) {
  const fs::path in_dir(o.input);
  json ev = json::parse(slurp_file((in_dir / "eval.json").string()), nullptr,
                        false);
  if (ev.is_discarded()) throw ParseError("malformed eval.json");
  const auto instances = read_instances(in_dir / "instances.csv");
  OutputSet outs(o.out);

  auto params_tn = outs.open("tables/params_tn.csv");
  params_tn << "station,day_class,mu_a,mu_a_hhmm,sigma_a,sigma_a_hhmm,mu_d,"
               "mu_d_hhmm,sigma_d,sigma_d_hhmm,beta2,n_profiles,"
               "non_interpretable\n";
  auto params_tnl = outs.open("tables/params_tnl.csv");
  params_tnl << "station,day_class,mu_a,mu_a_hhmm,sigma_a,sigma_a_hhmm,mu_d,"
                "mu_d_hhmm,sigma_d,sigma_d_hhmm,mean_tau,t_l,capacity_proxy,"
                "beta2,n_profiles,non_interpretable\n";
  auto loss_csv = outs.open("tables/loss.csv");
  loss_csv << "station,day_class,model,n_profiles,total_loss,loss_per_day,"
              "beta2\n";
  auto medians = outs.open("tables/nowcast_medians.csv");
  medians << "station,day_class,model,n,mean_pct,median_pct,q25_pct,q75_pct\n";
  auto winrates = outs.open("tables/winrates.csv");
  winrates << "station,day_class,model_a,model_b,win_rate_a,n_pairs\n";
  auto fit_err = outs.open("tables/fit_error.csv");
  fit_err << "station,day_class,model,n_days,overall_mean_pct\n";

  const auto params_cols = [](std::ostream& out, const json& params) {
    for (const char* key : {"mu_a", "sigma_a", "mu_d", "sigma_d"}) {
      const double v = params.at(key).get<double>();
      out << ',' << fmt_num(v) << ',' << format_hhmm(v);
    }
  };

  for (const auto& station : ev.at("stations")) {
    for (const auto& cls : station.at("classes")) {
      const std::string st = cls.at("station").get<std::string>();
      const std::string dc = cls.at("day_class").get<std::string>();
      const std::string file_tag = sanitize_name(st) + "_" + dc;

      if (cls.contains("tn")) {
        const json& tn = cls.at("tn");
        params_tn << csv_quote(st) << ',' << dc;
        params_cols(params_tn, tn.at("params"));
        params_tn << ',' << fmt_num(tn.at("fit").at("beta2").get<double>())
                  << ',' << tn.at("fit").at("n_profiles").get<int>() << ','
                  << (tn.at("fit").at("non_interpretable").get<bool>() ? 1 : 0)
                  << '\n';
        loss_csv << csv_quote(st) << ',' << dc << ",tn,"
                 << tn.at("fit").at("n_profiles").get<int>() << ','
                 << fmt_num(tn.at("fit").at("total_loss").get<double>()) << ','
                 << fmt_num(tn.at("fit").at("loss_per_day").get<double>())
                 << ',' << fmt_num(tn.at("fit").at("beta2").get<double>())
                 << '\n';
      }
      if (cls.contains("tnl")) {
        const json& tnl = cls.at("tnl");
        const double mean_tau = tnl.at("mean_tau").get<double>();
        std::string t_l;
        try {
          const TruncNorm arrival(tnl.at("params").at("mu_a").get<double>(),
                                  tnl.at("params").at("sigma_a").get<double>());
          if (mean_tau < 1.0) t_l = format_hhmm(arrival.quantile(mean_tau));
        } catch (const Error&) {
          // Non-interpretable arrival parameters; leave t_l blank.
        }
        params_tnl << csv_quote(st) << ',' << dc;
        params_cols(params_tnl, tnl.at("params"));
        params_tnl << ',' << fmt_num(mean_tau) << ',' << t_l << ','
                   << fmt_num(tnl.at("capacity_proxy").get<double>()) << ','
                   << fmt_num(tnl.at("fit").at("beta2").get<double>()) << ','
                   << tnl.at("fit").at("n_profiles").get<int>() << ','
                   << (tnl.at("fit").at("non_interpretable").get<bool>() ? 1
                                                                         : 0)
                   << '\n';
        loss_csv << csv_quote(st) << ',' << dc << ",tnl,"
                 << tnl.at("fit").at("n_profiles").get<int>() << ','
                 << fmt_num(tnl.at("fit").at("total_loss").get<double>()) << ','
                 << fmt_num(tnl.at("fit").at("loss_per_day").get<double>())
                 << ',' << fmt_num(tnl.at("fit").at("beta2").get<double>())
                 << '\n';
      }
      if (cls.contains("average")) {
        const json& avg = cls.at("average");
        loss_csv << csv_quote(st) << ',' << dc << ",average,"
                 << avg.at("n_days").get<int>() << ','
                 << fmt_num(avg.at("total_loss").get<double>()) << ','
                 << fmt_num(avg.at("loss_per_day").get<double>()) << ','
                 << fmt_num(avg.at("beta2").get<double>()) << '\n';
      }
      for (const auto& s : cls.at("sweep").at("summaries"))
        medians << csv_quote(st) << ',' << dc << ','
                << s.at("model").get<std::string>() << ',' << s.at("n").get<int>()
                << ',' << fmt_num(s.at("mean").get<double>()) << ','
                << fmt_num(s.at("median").get<double>()) << ','
                << fmt_num(s.at("q25").get<double>()) << ','
                << fmt_num(s.at("q75").get<double>()) << '\n';
      for (const auto& w : cls.at("sweep").at("win_rates"))
        winrates << csv_quote(st) << ',' << dc << ','
                 << w.at("a").get<std::string>() << ','
                 << w.at("b").get<std::string>() << ','
                 << fmt_num(w.at("win_rate_a").get<double>()) << ','
                 << w.at("n_pairs").get<int>() << '\n';
      for (const auto& f : cls.at("fit_errors"))
        fit_err << csv_quote(st) << ',' << dc << ','
                << f.at("model").get<std::string>() << ','
                << f.at("n_days").get<int>() << ','
                << fmt_num(f.at("overall_mean_pct").get<double>()) << '\n';

      // Long-format per-class figure data.
      {
        auto curves = outs.open("figures/curves_" + file_tag + ".csv");
        curves << "model,slot,time,value\n";
        for (const auto& [name, series] : cls.at("figure_curves").items())
          for (int s = 0; s < static_cast<int>(series.size()); ++s)
            curves << name << ',' << s + 1 << ','
                   << format_hhmm(grid_time(s + 1)) << ','
                   << fmt_num(series[s].get<double>()) << '\n';
      }
      {
        auto slots = outs.open("figures/fit_error_slots_" + file_tag + ".csv");
        slots << "model,slot,time,mean_pct,std_pct\n";
        for (const auto& f : cls.at("fit_errors")) {
          const auto& means = f.at("slot_mean_pct");
          const auto& stds = f.at("slot_std_pct");
          for (int s = 0; s < static_cast<int>(means.size()); ++s)
            slots << f.at("model").get<std::string>() << ',' << s + 1 << ','
                  << format_hhmm(grid_time(s + 1)) << ','
                  << fmt_num(means[s].get<double>()) << ','
                  << fmt_num(stds[s].get<double>()) << '\n';
        }
      }
      {
        auto sweep = outs.open("figures/nowcast_errors_" + file_tag + ".csv");
        sweep << "date,start,model,error_pct\n";
        for (const auto& r : instances)
          if (r.station == st && r.day_class == dc)
            sweep << r.date << ',' << r.start << ',' << r.model << ','
                  << fmt_num(r.error_pct) << '\n';
      }
    }
  }

  json cfg{{"input", o.input}, {"out", o.out}};
  outs.write_manifest(
      "report", cfg,
      {(in_dir / "eval.json").string(), (in_dir / "instances.csv").string()});
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"Park-and-ride occupancy toolkit: truncated-normal "
               "arrival/departure models, nowcasting, and simulation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  IngestOpts ingest_o;
  auto* c_ingest = app.add_subcommand(
      "ingest", "Clean a raw CSV into complete interpolated days");
  c_ingest->add_option("--input", ingest_o.input,
                       "CSV of station,timestamp,occupancy")
      ->required()
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--exclusions", ingest_o.exclusions,
                       "JSON exclusion list of station/date/reason")
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest_o.out, "Output directory")->required();
  add_config_option(c_ingest);

  FitOpts fit_o;
  auto* c_fit = app.add_subcommand(
      "fit", "Fit model parameters per station and day class");
  c_fit->add_option("--input", fit_o.input, "CSV of station,timestamp,occupancy")
      ->required()
      ->check(CLI::ExistingFile);
  c_fit->add_option("--exclusions", fit_o.exclusions, "JSON exclusion list")
      ->check(CLI::ExistingFile);
  c_fit->add_option("--out", fit_o.out, "Output directory")->required();
  c_fit->add_option("--station", fit_o.station, "Single station (default all)");
  c_fit->add_option("--class", fit_o.day_class, "Day class")
      ->transform(CLI::IsMember({"weekday", "friday", "weekend"}));
  c_fit->add_option("--model", fit_o.model, "Model to fit")
      ->transform(CLI::IsMember({"tn", "tnl"}))
      ->capture_default_str();
  c_fit->add_option("--test-weeks", fit_o.test_weeks,
                    "Final calendar weeks held out per station")
      ->check(CLI::Range(1, 52))
      ->capture_default_str();
  c_fit->add_option("--jobs", fit_o.jobs, "Worker cap; 0 = all cores")
      ->check(CLI::Range(0, 4096))
      ->capture_default_str();
  c_fit->add_option("--max-occupancy", fit_o.max_occupancy,
                    "Override the station maximum / capacity proxy")
      ->check(CLI::PositiveNumber);
  add_config_option(c_fit);

  EvalOpts eval_o;
  auto* c_eval = app.add_subcommand(
      "eval", "Train on the past, score fit error and nowcasts on held-out "
              "weeks");
  c_eval->add_option("--input", eval_o.input,
                     "CSV of station,timestamp,occupancy")
      ->required()
      ->check(CLI::ExistingFile);
  c_eval->add_option("--exclusions", eval_o.exclusions, "JSON exclusion list")
      ->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval_o.out, "Output directory")->required();
  c_eval->add_option("--station", eval_o.station,
                     "Single station (default all)");
  c_eval->add_option("--class", eval_o.day_class, "Day class")
      ->transform(CLI::IsMember({"weekday", "friday", "weekend"}));
  c_eval->add_option("--model", eval_o.models,
                     "Models to evaluate (repeatable; default all)")
      ->transform(CLI::IsMember({"tn", "tnl", "avg", "lreg"}));
  c_eval->add_option("--test-weeks", eval_o.test_weeks,
                     "Final calendar weeks held out per station")
      ->check(CLI::Range(1, 52))
      ->capture_default_str();
  c_eval->add_option("--window", eval_o.window,
                     "Nowcast window in slots after the start")
      ->check(CLI::Range(1, 45))
      ->capture_default_str();
  c_eval->add_option("--sweep-start", eval_o.sweep_start,
                     "First nowcast start time")
      ->check(HhmmSlot)
      ->capture_default_str();
  c_eval->add_option("--sweep-end", eval_o.sweep_end,
                     "Last nowcast start time")
      ->check(HhmmSlot)
      ->capture_default_str();
  c_eval->add_option("--jobs", eval_o.jobs, "Worker cap; 0 = all cores")
      ->check(CLI::Range(0, 4096))
      ->capture_default_str();
  c_eval->add_option("--max-occupancy", eval_o.max_occupancy,
                     "Override the station maximum / capacity proxy")
      ->check(CLI::PositiveNumber);
  add_config_option(c_eval);

  PredictOpts predict_o;
  auto* c_predict = app.add_subcommand(
      "predict", "Condition a fitted model on each day's first slots and "
                 "write full-day curves");
  c_predict->add_option("--params", predict_o.params,
                        "Model document from `fit`")
      ->required()
      ->check(CLI::ExistingFile);
  c_predict->add_option("--input", predict_o.input,
                        "CSV of station,timestamp,occupancy")
      ->required()
      ->check(CLI::ExistingFile);
  c_predict
      ->add_option("--exclusions", predict_o.exclusions, "JSON exclusion list")
      ->check(CLI::ExistingFile);
  c_predict->add_option("--out", predict_o.out, "Output directory")->required();
  c_predict->add_option("--start", predict_o.start, "Observation cutoff")
      ->check(HhmmSlot)
      ->capture_default_str();
  c_predict->add_option("--date", predict_o.date, "Single day (default all)")
      ->check(IsoDate);
  c_predict->add_option("--max-occupancy", predict_o.max_occupancy,
                        "Override the capacity proxy")
      ->check(CLI::PositiveNumber);
  add_config_option(c_predict);

  NowcastOpts nowcast_o;
  auto* c_nowcast = app.add_subcommand(
      "nowcast", "Score short-horizon predictions at one start time");
  c_nowcast->add_option("--params", nowcast_o.params,
                        "Model document from `fit`")
      ->required()
      ->check(CLI::ExistingFile);
  c_nowcast->add_option("--input", nowcast_o.input,
                        "CSV of station,timestamp,occupancy")
      ->required()
      ->check(CLI::ExistingFile);
  c_nowcast
      ->add_option("--exclusions", nowcast_o.exclusions, "JSON exclusion list")
      ->check(CLI::ExistingFile);
  c_nowcast->add_option("--out", nowcast_o.out, "Output directory")->required();
  c_nowcast->add_option("--start", nowcast_o.start, "Nowcast start time")
      ->check(HhmmSlot)
      ->capture_default_str();
  c_nowcast->add_option("--window", nowcast_o.window,
                        "Window in slots after the start")
      ->check(CLI::Range(1, 45))
      ->capture_default_str();
  c_nowcast->add_option("--date", nowcast_o.date, "Single day (default all)")
      ->check(IsoDate);
  c_nowcast->add_option("--max-occupancy", nowcast_o.max_occupancy,
                        "Override the station maximum / capacity proxy")
      ->check(CLI::PositiveNumber);
  add_config_option(c_nowcast);

  SimulateOpts sim_o;
  auto* c_sim = app.add_subcommand(
      "simulate", "Generate a synthetic corpus with ground-truth sidecar");
  c_sim->add_option("--out", sim_o.out, "Output directory")->required();
  c_sim->add_option("--stations", sim_o.stations, "Number of stations")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  c_sim->add_option("--weeks", sim_o.weeks, "Number of calendar weeks")
      ->check(CLI::Range(1, 520))
      ->capture_default_str();
  c_sim->add_option("--seed", sim_o.seed, "Master seed")
      ->capture_default_str();
  c_sim->add_option("--start-date", sim_o.start_date, "First day")
      ->check(IsoDate)
      ->capture_default_str();
  c_sim->add_flag("--anomalies", sim_o.anomalies,
                  "Inject one stuck-sensor and one holiday day per station");
  c_sim->add_option("--jobs", sim_o.jobs, "Worker cap; 0 = all cores")
      ->check(CLI::Range(0, 4096))
      ->capture_default_str();
  add_config_option(c_sim);

  ReportOpts report_o;
  auto* c_report = app.add_subcommand(
      "report", "Render an eval directory into tables/ and figures/ CSVs");
  c_report->add_option("--input", report_o.input, "Directory written by eval")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_report->add_option("--out", report_o.out, "Output directory")->required();
  add_config_option(c_report);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(app, std::move(args));
  } catch (const Error& e) {
    std::cerr << "parkcast: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest_o);
    if (c_fit->parsed()) return cmd_fit(fit_o);
    if (c_eval->parsed()) return cmd_eval(eval_o);
    if (c_predict->parsed()) return cmd_predict(predict_o);
    if (c_nowcast->parsed()) return cmd_nowcast(nowcast_o);
    if (c_sim->parsed()) return cmd_simulate(sim_o);
    if (c_report->parsed()) return cmd_report(report_o);
  } catch (const InvalidConfig& e) {
    std::cerr << "parkcast: invalid option value: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "parkcast: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "parkcast: internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
