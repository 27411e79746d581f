#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "parkcast/baselines.hpp"
#include "parkcast/data.hpp"
#include "parkcast/errors.hpp"
#include "parkcast/evaluation.hpp"
#include "parkcast/fitting.hpp"
#include "parkcast/grid.hpp"

#include "oracles.hpp"

using namespace parkcast;

namespace {

double uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

OccupancyProfile raw_day(const std::string& station, const std::string& date,
                         std::mt19937_64& gen, double base = 5.0) {
  OccupancyProfile p;
  p.station = station;
  p.date = parse_date(date);
  p.day_class = day_class_of(p.date);
  p.values.resize(kSlotsPerDay);
  for (int i = 0; i < kSlotsPerDay; ++i) {
    // A rough day shape with jitter; strictly positive and non-constant.
    const double hump = 60.0 * std::exp(-std::pow((i - 20.0) / 8.0, 2));
    p.values[i] = base + hump + 4.0 * uniform(gen);
  }
  return p;
}

struct DayFrameRef {
  double min;
  double sum_above;
  double max_above;
};

DayFrameRef frame_of(const OccupancyProfile& day) {
  DayFrameRef f{day.values[0], 0.0, 0.0};
  for (const double v : day.values) f.min = std::min(f.min, v);
  for (const double v : day.values) {
    f.sum_above += v - f.min;
    f.max_above = std::max(f.max_above, v - f.min);
  }
  return f;
}

}  // namespace

TEST_CASE("count curves rescale shapes into the day's frame") {
  std::mt19937_64 gen(606);
  const OccupancyProfile day = raw_day("X", "2024-03-06", gen);
  const DayFrameRef f = frame_of(day);
  const TnParams params{0.3, 0.05, 0.76, 0.1};

  const auto tn_curve = tn_count_curve(params)(day);
  const auto tn_shape = tn_curve_grid_normalised(params);
  for (int i = 0; i < kSlotsPerDay; i += 5) {
    CHECK(tn_curve[i] ==
          doctest::Approx(f.min + f.sum_above * tn_shape[i]).epsilon(1e-12));
  }

  const auto tnl_curve = tnl_count_curve(params, 0.8)(day);
  const auto tnl_shape = tnl_curve_grid(params, 0.8);
  for (int i = 0; i < kSlotsPerDay; i += 5) {
    CHECK(tnl_curve[i] ==
          doctest::Approx(f.min + f.max_above * tnl_shape[i]).epsilon(1e-12));
  }

  AverageProfile avg;
  avg.values.assign(kSlotsPerDay, 0.0);
  for (int i = 0; i < kSlotsPerDay; ++i) avg.values[i] = 0.01 + 0.0002 * i;
  const auto avg_curve = average_count_curve(avg)(day);
  for (int i = 0; i < kSlotsPerDay; i += 5) {
    CHECK(avg_curve[i] ==
          doctest::Approx(f.min + f.sum_above * avg.values[i]).epsilon(1e-12));
  }

  OccupancyProfile normalised = day;
  normalised.normalisation = Normalisation::Area;
  CHECK_THROWS_AS(tn_count_curve(params)(normalised), InvalidParams);
  OccupancyProfile stub = day;
  stub.values.resize(10);
  CHECK_THROWS_AS(tnl_count_curve(params, 0.8)(stub), LengthMismatch);
}

TEST_CASE("fit_error reproduces per-slot statistics from first principles") {
  std::mt19937_64 gen(1212);
  std::vector<OccupancyProfile> days;
  for (int d = 0; d < 5; ++d) {
    days.push_back(raw_day("Alpha", "2024-03-0" + std::to_string(d + 4), gen));
  }
  const TnParams params{0.3, 0.05, 0.76, 0.1};
  const auto curve_fn = tn_count_curve(params);
  const double station_max = 80.0;
  const FitErrorReport report = fit_error(days, "tn", curve_fn, station_max);
  CHECK(report.station == "Alpha");
  CHECK(report.model == "tn");
  CHECK(report.n_days == 5);

  double overall = 0.0;
  for (int i = 0; i < kSlotsPerDay; ++i) {
    std::vector<double> pct;
    for (const auto& day : days) {
      const auto curve = curve_fn(day);
      pct.push_back(std::fabs(day.values[i] - curve[i]) / station_max * 100.0);
    }
    const auto [mean, stdev] = oracle::mean_sample_std(pct);
    CAPTURE(i);
    CHECK(report.slot_mean_pct[i] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(report.slot_std_pct[i] == doctest::Approx(stdev).epsilon(1e-9));
    overall += mean;
  }
  CHECK(report.overall_mean_pct ==
        doctest::Approx(overall / kSlotsPerDay).epsilon(1e-12));

  // A single day has no sample variance.
  const FitErrorReport one =
      fit_error(std::span<const OccupancyProfile>(days).first(1), "tn",
                curve_fn, station_max);
  for (int i = 0; i < kSlotsPerDay; ++i) CHECK(one.slot_std_pct[i] == 0.0);

  CHECK_THROWS_AS(fit_error({}, "tn", curve_fn, station_max),
                  InsufficientData);
  CHECK_THROWS_AS(fit_error(days, "tn", curve_fn, 0.0), InvalidParams);
  auto tagged = days;
  tagged[0].normalisation = Normalisation::Max;
  CHECK_THROWS_AS(fit_error(tagged, "tn", curve_fn, station_max),
                  InvalidParams);
}

namespace {

struct SweepFixture {
  std::vector<OccupancyProfile> days;
  std::vector<OccupancyProfile> train;
  TnModel tn{TnParams{0.3, 0.05, 0.76, 0.1}};
  AverageProfile average;
  SweepConfig config;

  SweepFixture() {
    std::mt19937_64 gen(4004);
    // Deliberately out of order; the sweep must sort by (date, station).
    days.push_back(raw_day("B", "2024-03-06", gen));
    days.push_back(raw_day("A", "2024-03-06", gen));
    days.push_back(raw_day("A", "2024-03-05", gen));
    for (int d = 0; d < 6; ++d) {
      train.push_back(
          raw_day("A", "2024-02-0" + std::to_string(d + 1), gen));
    }
    average = build_average(train, DayClass::Weekday);
    config.start_lo = 14;
    config.start_hi = 16;
    config.start_step = 1;
    config.window = 2;
    config.station_max = 80.0;
    config.jobs = 1;
  }
};

}  // namespace

TEST_CASE("nowcast_sweep emits ordered instances for every cell") {
  SweepFixture fx;
  LinRegCache cache(fx.train);
  SweepModels models;
  models.tn = &fx.tn;
  models.tnl = &fx.tn;
  models.capacity_proxy = 70.0;
  models.average = &fx.average;
  models.linreg = &cache;

  const auto instances = nowcast_sweep(fx.days, models, fx.config);
  const std::vector<std::string> model_order = {"average", "linreg", "tn",
                                                "tnl"};
  REQUIRE(instances.size() == 3u * 3u * 4u);
  std::size_t idx = 0;
  const std::vector<std::pair<std::string, std::string>> day_order = {
      {"A", "2024-03-05"}, {"A", "2024-03-06"}, {"B", "2024-03-06"}};
  for (const auto& [station, date] : day_order) {
    for (int h = 14; h <= 16; ++h) {
      for (const auto& model : model_order) {
        CAPTURE(idx);
        CHECK(instances[idx].station == station);
        CHECK(instances[idx].date == parse_date(date));
        CHECK(instances[idx].start_slot == h);
        CHECK(instances[idx].model == model);
        CHECK(!instances[idx].persistence_fallback);
        ++idx;
      }
    }
  }

  // Recompute one TN cell end to end: first sorted day, h = 15.
  const OccupancyProfile& day = fx.days[2];  // A, 2024-03-05
  const auto fit = condition_tn(std::span<const double>(day.values).first(15),
                                fx.tn);
  const double want = nowcast_error(day.values, predict_tn_grid(fit, fx.tn),
                                    15, 2, fx.config.station_max);
  const auto& inst = instances[1 * 4 + 2];  // day 0, start 15, model "tn"
  CHECK(inst.error_pct == doctest::Approx(want).epsilon(1e-12));

  // And one linreg cell: day 0, h = 14.
  std::vector<double> grid(kSlotsPerDay, 0.0);
  for (int y = 14; y <= 16; ++y) {
    const int x = std::min(14, y - 1);
    grid[y - 1] = predict_linreg(
        cache.get(x, y), std::span<const double>(day.values).first(x));
  }
  const double linreg_want =
      nowcast_error(day.values, grid, 14, 2, fx.config.station_max);
  CHECK(instances[1].error_pct == doctest::Approx(linreg_want).epsilon(1e-12));

  // Serial reference produces identical instances.
  const auto serial = nowcast_sweep_serial(fx.days, models, fx.config);
  REQUIRE(serial.size() == instances.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].error_pct == instances[i].error_pct);
    CHECK(serial[i].model == instances[i].model);
  }
}

TEST_CASE("nowcast_sweep with a single model emits only that model") {
  SweepFixture fx;
  SweepModels models;
  models.tn = &fx.tn;
  const auto instances = nowcast_sweep(fx.days, models, fx.config);
  REQUIRE(instances.size() == 9);
  for (const auto& inst : instances) CHECK(inst.model == "tn");
}

TEST_CASE("nowcast_sweep validates its configuration") {
  SweepFixture fx;
  SweepModels models;
  models.tn = &fx.tn;

  SweepConfig bad = fx.config;
  bad.start_lo = 2;
  CHECK_THROWS_AS(nowcast_sweep(fx.days, models, bad), InvalidConfig);
  bad = fx.config;
  bad.start_step = 0;
  CHECK_THROWS_AS(nowcast_sweep(fx.days, models, bad), InvalidConfig);
  bad = fx.config;
  bad.window = 0;
  CHECK_THROWS_AS(nowcast_sweep(fx.days, models, bad), InvalidConfig);
  bad = fx.config;
  bad.start_hi = 47;  // 47 + window 2 > 48
  CHECK_THROWS_AS(nowcast_sweep(fx.days, models, bad), InvalidConfig);
  bad = fx.config;
  bad.start_lo = 20;
  bad.start_hi = 15;
  CHECK_THROWS_AS(nowcast_sweep(fx.days, models, bad), InvalidConfig);
  bad = fx.config;
  bad.station_max = 0.0;
  CHECK_THROWS_AS(nowcast_sweep(fx.days, models, bad), InvalidParams);

  SweepModels tnl_no_cap;
  tnl_no_cap.tnl = &fx.tn;
  tnl_no_cap.capacity_proxy = 0.0;
  CHECK_THROWS_AS(nowcast_sweep(fx.days, tnl_no_cap, fx.config), InvalidParams);
}

TEST_CASE("singular conditioning falls back to persistence") {
  // Arrival mass far to the right: the TN curve is exactly zero over every
  // morning window, so conditioning is singular at each start slot.
  const TnModel far(TnParams{0.95, 0.005, 0.99, 0.003});
  std::mt19937_64 gen(17);
  OccupancyProfile day;
  day.station = "S";
  day.date = parse_date("2024-03-05");
  day.day_class = DayClass::Weekday;
  day.values.resize(kSlotsPerDay);
  for (int i = 0; i < kSlotsPerDay; ++i) {
    day.values[i] = 10.0 + i + uniform(gen);  // strictly increasing
  }
  const std::vector<OccupancyProfile> days = {day};

  SweepModels models;
  models.tn = &far;
  SweepConfig config;
  config.start_lo = 14;
  config.start_hi = 15;
  config.start_step = 1;
  config.window = 2;
  config.station_max = 60.0;
  config.jobs = 1;
  const auto instances = nowcast_sweep(days, models, config);
  REQUIRE(instances.size() == 2);
  for (const auto& inst : instances) {
    CHECK(inst.persistence_fallback);
    const std::vector<double> flat(kSlotsPerDay,
                                   day.values[inst.start_slot - 1]);
    const double want = nowcast_error(day.values, flat, inst.start_slot, 2,
                                      config.station_max);
    CHECK(inst.error_pct == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("summarise computes exact order statistics") {
  const DistSummary odd = summarise({5.0, 3.0, 1.0, 4.0, 2.0});
  CHECK(odd.n == 5);
  CHECK(odd.mean == doctest::Approx(3.0));
  CHECK(odd.median == 3.0);
  CHECK(odd.q25 == 2.0);
  CHECK(odd.q75 == 4.0);

  const DistSummary even = summarise({4.0, 1.0, 3.0, 2.0});
  CHECK(even.n == 4);
  CHECK(even.median == doctest::Approx(2.5));
  CHECK(even.q25 == doctest::Approx(1.75));
  CHECK(even.q75 == doctest::Approx(3.25));

  const DistSummary single = summarise({7.5});
  CHECK(single.n == 1);
  CHECK(single.mean == 7.5);
  CHECK(single.median == 7.5);
  CHECK(single.q25 == 7.5);
  CHECK(single.q75 == 7.5);

  const DistSummary empty = summarise({});
  CHECK(empty.n == 0);
  CHECK(empty.mean == 0.0);

  std::mt19937_64 gen(8);
  std::vector<double> values(257);
  for (double& v : values) v = 100.0 * uniform(gen);
  const auto [mean, stdev] = oracle::mean_sample_std(values);
  (void)stdev;
  CHECK(summarise(values).mean == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("win_rate splits ties and complements itself") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {2.0, 2.0, 1.0};
  CHECK(win_rate(a, b) == doctest::Approx(0.5));
  CHECK(win_rate(b, a) == doctest::Approx(0.5));

  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = uniform(gen);
      // Occasional exact ties exercise the half-credit branch.
      y[i] = (i % 7 == 0) ? x[i] : uniform(gen);
    }
    CHECK(win_rate(x, y) + win_rate(y, x) == doctest::Approx(1.0));
  }

  const std::vector<double> shorter = {1.0};
  CHECK_THROWS_AS(win_rate(a, shorter), LengthMismatch);
  CHECK_THROWS_AS(win_rate({}, {}), InsufficientData);
}