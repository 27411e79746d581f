#pragma once

#include <chrono>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "parkcast/baselines.hpp"
#include "parkcast/data.hpp"
#include "parkcast/forecast.hpp"
#include "parkcast/models.hpp"

namespace parkcast {

/// Maps one raw test day to the model's curve in count space.
using CountCurveFn =
    std::function<std::vector<double>(const OccupancyProfile&)>;

/// TN curve denormalised per test day: min + sum(o - min) * unit-sum shape.
CountCurveFn tn_count_curve(const TnParams& params);

/// TNL curve denormalised per test day with the display tau:
/// min + max(o - min) * f_TNL(t; theta, tau).
CountCurveFn tnl_count_curve(const TnParams& params, double tau);

/// Average-profile curve denormalised per test day like the TN curve.
CountCurveFn average_count_curve(const AverageProfile& average);

struct FitErrorReport {
  std::string station;
  DayClass day_class = DayClass::Weekday;
  std::string model;
  int n_days = 0;
  std::vector<double> slot_mean_pct;  // 48 per-slot means
  std::vector<double> slot_std_pct;   // 48 per-slot sample stds
  double overall_mean_pct = 0.0;
};

/// Per-slot absolute errors of the model curve against raw test days, as a
/// percentage of the station maximum.
FitErrorReport fit_error(std::span<const OccupancyProfile> test_raw,
                         const std::string& model_name,
                         const CountCurveFn& count_curve, double station_max);

/// Models entering a nowcast sweep; null entries are skipped.
struct SweepModels {
  const TnModel* tn = nullptr;
  const TnModel* tnl = nullptr;  // shares TnParams, conditioned per day
  double capacity_proxy = 0.0;   // required when tnl is set
  const AverageProfile* average = nullptr;
  LinRegCache* linreg = nullptr;
};

struct SweepConfig {
  int start_lo = 14;   // 07:00
  int start_hi = 46;   // 23:00
  int start_step = 1;  // every 30 minutes
  int window = 2;
  double station_max = 0.0;
  int jobs = 0;
};

struct SweepInstance {
  std::string station;
  std::chrono::sys_days date{};
  DayClass day_class = DayClass::Weekday;
  int start_slot = 0;
  std::string model;
  double error_pct = 0.0;
  /// Conditioning was singular and the prediction fell back to persistence.
  bool persistence_fallback = false;
};

/// Errors for every (test day, start slot, model) triple, ordered by day,
/// then start, then model name. Work is distributed over (day, start)
/// pairs; identical output to the serial reference for any schedule.
std::vector<SweepInstance> nowcast_sweep(
    std::span<const OccupancyProfile> test_raw, const SweepModels& models,
    const SweepConfig& config);

/// Serial reference for nowcast_sweep.
std::vector<SweepInstance> nowcast_sweep_serial(
    std::span<const OccupancyProfile> test_raw, const SweepModels& models,
    const SweepConfig& config);

struct DistSummary {
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int n = 0;
};

/// Mean plus exact order statistics: the median averages the two central
/// values for even n; quartiles interpolate linearly between order stats.
DistSummary summarise(std::vector<double> values);

/// Fraction of paired instances where a beats b; ties count half for each.
double win_rate(std::span<const double> a_errors,
                std::span<const double> b_errors);

}  // namespace parkcast
