// Benchmarks the OpenMP kernels against their serial reference twins on a
// synthetic workload and checks that both produce identical results.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parkcast/baselines.hpp"
#include "parkcast/data.hpp"
#include "parkcast/evaluation.hpp"
#include "parkcast/fitting.hpp"
#include "parkcast/models.hpp"
#include "parkcast/simulator.hpp"

using namespace parkcast;

namespace {

double time_best_ms(int repeat, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

bool same_corpus(const Corpus& a, const Corpus& b) {
  if (a.stations.size() != b.stations.size()) return false;
  for (std::size_t s = 0; s < a.stations.size(); ++s) {
    const auto& da = a.stations[s].days;
    const auto& db = b.stations[s].days;
    if (da.size() != db.size()) return false;
    for (std::size_t d = 0; d < da.size(); ++d)
      if (da[d].occupancy != db[d].occupancy ||
          da[d].rejected != db[d].rejected)
        return false;
  }
  return true;
}

bool same_params(const TnParams& a, const TnParams& b) {
  return a.mu_a == b.mu_a && a.sigma_a == b.sigma_a && a.mu_d == b.mu_d &&
         a.sigma_d == b.sigma_d;
}

bool same_instances(const std::vector<SweepInstance>& a,
                    const std::vector<SweepInstance>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].model != b[i].model || a[i].error_pct != b[i].error_pct)
      return false;
  return true;
}

void print_row(const char* name, double serial_ms, double parallel_ms,
               bool identical) {
  std::printf("%-18s %12.2f %12.2f %9.2fx   %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms,
              identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parkcast kernel benchmarks: serial reference vs parallel"};
  int stations = 6;
  int weeks = 12;
  int jobs = 0;
  int repeat = 3;
  std::uint64_t seed = 3;
  app.add_option("--stations", stations)->check(CLI::Range(1, 64));
  app.add_option("--weeks", weeks)->check(CLI::Range(1, 104));
  app.add_option("--jobs", jobs)->check(CLI::Range(0, 4096));
  app.add_option("--repeat", repeat)->check(CLI::Range(1, 20));
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  CorpusConfig cc;
  cc.stations = default_station_set(stations, seed);
  cc.start_date = parse_date("2024-03-04");
  cc.weeks = weeks;
  cc.seed = seed;
  cc.jobs = jobs;

  std::printf("%-18s %12s %12s %10s\n", "kernel", "serial ms", "parallel ms",
              "speedup");

  Corpus corpus_s, corpus_p;
  const double t_corpus_s =
      time_best_ms(repeat, [&] { corpus_s = simulate_corpus_serial(cc); });
  const double t_corpus_p =
      time_best_ms(repeat, [&] { corpus_p = simulate_corpus(cc); });
  print_row("corpus", t_corpus_s, t_corpus_p, same_corpus(corpus_s, corpus_p));

  // Training days for the fit benchmarks: the first station's weekdays.
  std::vector<OccupancyProfile> train;
  for (const auto& day : corpus_p.stations.front().days) {
    if (day.day_class != DayClass::Weekday) continue;
    OccupancyProfile p;
    p.station = corpus_p.stations.front().config.name;
    p.date = day.date;
    p.day_class = day.day_class;
    p.values.assign(day.occupancy.begin(), day.occupancy.end());
    train.push_back(std::move(p));
  }

  auto area = train;
  for (auto& p : area) normalise(p, Normalisation::Area, BaselineMode::SubtractDayMin);
  auto max_norm = train;
  for (auto& p : max_norm)
    normalise(p, Normalisation::Max, BaselineMode::SubtractDayMin);

  FitOptions serial_fo;
  serial_fo.jobs = 1;
  FitOptions parallel_fo;
  parallel_fo.jobs = jobs;

  TnFit tn_s, tn_p;
  const double t_tn_s =
      time_best_ms(repeat, [&] { tn_s = fit_tn(area, serial_fo); });
  const double t_tn_p =
      time_best_ms(repeat, [&] { tn_p = fit_tn(area, parallel_fo); });
  print_row("fit_tn", t_tn_s, t_tn_p, same_params(tn_s.params, tn_p.params));

  TnlFit tnl_s, tnl_p;
  const double t_tnl_s =
      time_best_ms(repeat, [&] { tnl_s = fit_tnl(max_norm, serial_fo); });
  const double t_tnl_p =
      time_best_ms(repeat, [&] { tnl_p = fit_tnl(max_norm, parallel_fo); });
  print_row("fit_tnl", t_tnl_s, t_tnl_p,
            same_params(tnl_s.params, tnl_p.params));

  const TnModel tn_model(tn_p.params);
  const TnModel tnl_model(tnl_p.params);
  const AverageProfile avg = build_average(area, DayClass::Weekday);
  LinRegCache cache(train);
  SweepModels sm;
  sm.tn = &tn_model;
  sm.tnl = &tnl_model;
  sm.capacity_proxy = max_occupancy(train);
  sm.average = &avg;
  sm.linreg = &cache;
  SweepConfig sc;
  sc.station_max = max_occupancy(train);
  sc.jobs = jobs;

  std::vector<SweepInstance> sweep_s, sweep_p;
  const double t_sweep_s = time_best_ms(
      repeat, [&] { sweep_s = nowcast_sweep_serial(train, sm, sc); });
  const double t_sweep_p =
      time_best_ms(repeat, [&] { sweep_p = nowcast_sweep(train, sm, sc); });
  print_row("nowcast_sweep", t_sweep_s, t_sweep_p,
            same_instances(sweep_s, sweep_p));

  return 0;
}
