#include <doctest.h>

#include <atomic>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "parkcast/data.hpp"
#include "parkcast/errors.hpp"
#include "parkcast/evaluation.hpp"
#include "parkcast/fitting.hpp"
#include "parkcast/models.hpp"
#include "parkcast/parallel.hpp"
#include "parkcast/simulator.hpp"

using namespace parkcast;

TEST_CASE("resolve_jobs treats zero as all available and clamps to one") {
  CHECK(resolve_jobs(1) == 1);
  CHECK(resolve_jobs(4) == 4);
  CHECK(resolve_jobs(0) >= 1);
  CHECK(resolve_jobs(-3) == resolve_jobs(0));
}

TEST_CASE("parallel_for fills disjoint slots like the serial loop") {
  const std::size_t n = 1000;
  std::vector<double> parallel_out(n, 0.0);
  std::vector<double> serial_out(n, 0.0);
  const auto work = [](std::size_t i) {
    return static_cast<double>(i) * 1.5 + 1.0;
  };
  parallel_for(n, 0, [&](std::size_t i) { parallel_out[i] = work(i); });
  serial_for(n, [&](std::size_t i) { serial_out[i] = work(i); });
  CHECK(parallel_out == serial_out);

  std::atomic<int> calls{0};
  parallel_for(0, 0, [&](std::size_t) { ++calls; });
  CHECK(calls.load() == 0);
  parallel_for(1, 0, [&](std::size_t) { ++calls; });
  CHECK(calls.load() == 1);
}

TEST_CASE("exceptions thrown by workers reach the caller") {
  CHECK_THROWS_AS(
      parallel_for(64, 0,
                   [](std::size_t i) {
                     if (i == 17) throw InvalidParams("boom");
                   }),
      InvalidParams);
  CHECK_THROWS_AS(parallel_for(8, 2,
                               [](std::size_t) {
                                 throw std::runtime_error("each");
                               }),
                  std::runtime_error);
}

namespace {

std::vector<OccupancyProfile> area_profiles(int n) {
  std::mt19937_64 gen(7777);
  const TnParams truth{0.3, 0.05, 0.76, 0.11};
  const auto curve = tn_curve_grid_normalised(truth);
  std::vector<OccupancyProfile> out;
  for (int d = 0; d < n; ++d) {
    OccupancyProfile p;
    p.station = "par";
    p.date = parse_date("2024-03-04") + std::chrono::days{d};
    p.day_class = DayClass::Weekday;
    p.normalisation = Normalisation::Area;
    p.values.assign(curve.begin(), curve.end());
    for (double& v : p.values) {
      v += 0.002 * (static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("fit_tn parallel starts reproduce the serial reference") {
  const auto train = area_profiles(8);
  const TnFit serial = fit_tn(train, FitOptions{1, 300, 1e-6});
  const TnFit parallel = fit_tn(train, FitOptions{0, 300, 1e-6});
  CHECK(parallel.params.mu_a == serial.params.mu_a);
  CHECK(parallel.params.sigma_a == serial.params.sigma_a);
  CHECK(parallel.params.mu_d == serial.params.mu_d);
  CHECK(parallel.params.sigma_d == serial.params.sigma_d);
  CHECK(parallel.total_loss == serial.total_loss);
  CHECK(parallel.winner_start == serial.winner_start);
  CHECK(parallel.iterations == serial.iterations);
  CHECK(parallel.best_so_far == serial.best_so_far);
}

TEST_CASE("simulate_corpus parallel output is byte-identical to serial") {
  CorpusConfig config;
  config.stations = default_station_set(3, 2);
  config.start_date = parse_date("2024-03-04");
  config.weeks = 2;
  config.seed = 99;
  config.inject_anomalies = true;
  config.jobs = 0;
  const Corpus parallel = simulate_corpus(config);
  const Corpus serial = simulate_corpus_serial(config);
  REQUIRE(parallel.stations.size() == serial.stations.size());
  for (std::size_t s = 0; s < serial.stations.size(); ++s) {
    REQUIRE(parallel.stations[s].days.size() == serial.stations[s].days.size());
    for (std::size_t d = 0; d < serial.stations[s].days.size(); ++d) {
      const auto& a = parallel.stations[s].days[d];
      const auto& b = serial.stations[s].days[d];
      CHECK(a.occupancy == b.occupancy);
      CHECK(a.rejected == b.rejected);
      CHECK(a.anomaly == b.anomaly);
      CHECK(a.saturated == b.saturated);
    }
  }
}

TEST_CASE("nowcast_sweep parallel instances match the serial reference") {
  std::mt19937_64 gen(2468);
  std::vector<OccupancyProfile> days;
  for (int d = 0; d < 4; ++d) {
    OccupancyProfile p;
    p.station = "par";
    p.date = parse_date("2024-03-04") + std::chrono::days{d};
    p.day_class = day_class_of(p.date);
    p.values.resize(kSlotsPerDay);
    for (int i = 0; i < kSlotsPerDay; ++i) {
      p.values[i] = 5.0 + i + 3.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    }
    days.push_back(std::move(p));
  }
  const TnModel tn(TnParams{0.3, 0.05, 0.76, 0.1});
  SweepModels models;
  models.tn = &tn;
  models.tnl = &tn;
  models.capacity_proxy = 45.0;
  SweepConfig config;
  config.start_lo = 10;
  config.start_hi = 30;
  config.start_step = 2;
  config.window = 2;
  config.station_max = 55.0;

  config.jobs = 0;
  const auto parallel = nowcast_sweep(days, models, config);
  const auto serial = nowcast_sweep_serial(days, models, config);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(parallel[i].station == serial[i].station);
    CHECK(parallel[i].date == serial[i].date);
    CHECK(parallel[i].start_slot == serial[i].start_slot);
    CHECK(parallel[i].model == serial[i].model);
    CHECK(parallel[i].error_pct == serial[i].error_pct);
    CHECK(parallel[i].persistence_fallback == serial[i].persistence_fallback);
  }
}