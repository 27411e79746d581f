#include "parkcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parkcast/errors.hpp"
#include "parkcast/fitting.hpp"
#include "parkcast/parallel.hpp"

namespace parkcast {

namespace {

struct DayFrame {
  double min = 0.0;
  double sum_above_min = 0.0;
  double max_above_min = 0.0;
};

DayFrame day_frame(const OccupancyProfile& day) {
  DayFrame f;
  const auto [lo, hi] = std::minmax_element(day.values.begin(), day.values.end());
  f.min = *lo;
  f.max_above_min = *hi - *lo;
  for (const double v : day.values) f.sum_above_min += v - f.min;
  return f;
}

void require_raw_day(const OccupancyProfile& day, const char* who) {
  if (day.normalisation != Normalisation::None) {
    throw InvalidParams(std::string(who) + ": expects raw-count profiles");
  }
  if (day.values.size() != static_cast<std::size_t>(kSlotsPerDay)) {
    throw LengthMismatch(std::string(who) + ": profile must have 48 slots");
  }
}

}  // namespace

CountCurveFn tn_count_curve(const TnParams& params) {
  const auto shape = tn_curve_grid_normalised(params);
  return [shape](const OccupancyProfile& day) {
    require_raw_day(day, "tn_count_curve");
    const DayFrame f = day_frame(day);
    std::vector<double> out(kSlotsPerDay);
    for (int i = 0; i < kSlotsPerDay; ++i) {
      out[i] = f.min + f.sum_above_min * shape[i];
    }
    return out;
  };
}

CountCurveFn tnl_count_curve(const TnParams& params, double tau) {
  const auto shape = tnl_curve_grid(params, tau);
  return [shape](const OccupancyProfile& day) {
    require_raw_day(day, "tnl_count_curve");
    const DayFrame f = day_frame(day);
    std::vector<double> out(kSlotsPerDay);
    for (int i = 0; i < kSlotsPerDay; ++i) {
      out[i] = f.min + f.max_above_min * shape[i];
    }
    return out;
  };
}

CountCurveFn average_count_curve(const AverageProfile& average) {
  const std::vector<double> shape = average.values;
  return [shape](const OccupancyProfile& day) {
    require_raw_day(day, "average_count_curve");
    const DayFrame f = day_frame(day);
    std::vector<double> out(kSlotsPerDay);
    for (int i = 0; i < kSlotsPerDay; ++i) {
      out[i] = f.min + f.sum_above_min * shape[i];
    }
    return out;
  };
}

FitErrorReport fit_error(std::span<const OccupancyProfile> test_raw,
                         const std::string& model_name,
                         const CountCurveFn& count_curve, double station_max) {
  if (test_raw.empty()) {
    throw InsufficientData("fit_error: no test profiles");
  }
  if (!(station_max > 0.0)) {
    throw InvalidParams("fit_error: station max must be positive");
  }
  FitErrorReport report;
  report.station = test_raw.front().station;
  report.day_class = test_raw.front().day_class;
  report.model = model_name;
  report.n_days = static_cast<int>(test_raw.size());

  std::vector<double> sum(kSlotsPerDay, 0.0);
  std::vector<double> sum_sq(kSlotsPerDay, 0.0);
  for (const auto& day : test_raw) {
    require_raw_day(day, "fit_error");
    const auto curve = count_curve(day);
    for (int i = 0; i < kSlotsPerDay; ++i) {
      const double pct =
          std::fabs(day.values[i] - curve[i]) / station_max * 100.0;
      sum[i] += pct;
      sum_sq[i] += pct * pct;
    }
  }
  const double n = report.n_days;
  report.slot_mean_pct.resize(kSlotsPerDay);
  report.slot_std_pct.assign(kSlotsPerDay, 0.0);
  double overall = 0.0;
  for (int i = 0; i < kSlotsPerDay; ++i) {
    report.slot_mean_pct[i] = sum[i] / n;
    overall += report.slot_mean_pct[i];
    if (report.n_days > 1) {
      const double var =
          (sum_sq[i] - sum[i] * sum[i] / n) / (n - 1.0);
      report.slot_std_pct[i] = std::sqrt(std::max(0.0, var));
    }
  }
  report.overall_mean_pct = overall / kSlotsPerDay;
  return report;
}

namespace {

/// One day x one start: evaluates every configured model. Keeps model
/// output order fixed: average, linreg, tn, tnl.
void evaluate_cell(const OccupancyProfile& day, int h,
                   const SweepModels& models, const SweepConfig& config,
                   std::vector<SweepInstance>& out) {
  const std::span<const double> obs(day.values);
  const std::span<const double> prefix = obs.first(h);
  const int w = config.window;

  const auto push = [&](const char* name, const std::vector<double>& grid,
                        bool fallback) {
    SweepInstance inst;
    inst.station = day.station;
    inst.date = day.date;
    inst.day_class = day.day_class;
    inst.start_slot = h;
    inst.model = name;
    inst.error_pct = nowcast_error(obs, grid, h, w, config.station_max);
    inst.persistence_fallback = fallback;
    out.push_back(std::move(inst));
  };
  const auto persistence = [&]() {
    return std::vector<double>(kSlotsPerDay, day.values[h - 1]);
  };

  // Emission order is the model-name order promised by nowcast_sweep.
  if (models.average != nullptr) {
    try {
      const PredictionFit fit = condition_average(prefix, *models.average);
      push("average", predict_average_grid(fit, *models.average), false);
    } catch (const SingularFit&) {
      push("average", persistence(), true);
    }
  }
  if (models.linreg != nullptr) {
    // Slot y is predicted from strictly earlier data: x = min(h, y-1).
    std::vector<double> grid(kSlotsPerDay, 0.0);
    for (int y = h; y <= h + w; ++y) {
      const int x = std::min(h, y - 1);
      const LinRegModel& m = models.linreg->get(x, y);
      grid[y - 1] = predict_linreg(m, obs.first(x));
    }
    push("linreg", grid, false);
  }
  if (models.tn != nullptr) {
    try {
      const PredictionFit fit = condition_tn(prefix, *models.tn);
      push("tn", predict_tn_grid(fit, *models.tn), false);
    } catch (const SingularFit&) {
      push("tn", persistence(), true);
    }
  }
  if (models.tnl != nullptr) {
    try {
      const PredictionFit fit =
          condition_tnl(prefix, *models.tnl, models.capacity_proxy);
      push("tnl", predict_tnl_grid(fit, *models.tnl), false);
    } catch (const SingularFit&) {
      push("tnl", persistence(), true);
    }
  }
}

std::vector<SweepInstance> run_sweep(std::span<const OccupancyProfile> test_raw,
                                     const SweepModels& models,
                                     const SweepConfig& config, bool parallel) {
  // Conditioning needs at least 3 observed slots.
  if (config.start_lo < 3 || config.start_step < 1 || config.window < 1 ||
      config.start_hi + config.window > kSlotsPerDay ||
      config.start_lo > config.start_hi) {
    throw InvalidConfig("nowcast_sweep: start range or window out of bounds");
  }
  if (!(config.station_max > 0.0)) {
    throw InvalidParams("nowcast_sweep: station max must be positive");
  }
  if (models.tnl != nullptr && !(models.capacity_proxy > 0.0)) {
    throw InvalidParams("nowcast_sweep: tnl model needs a capacity proxy");
  }
  std::vector<OccupancyProfile> days(test_raw.begin(), test_raw.end());
  std::stable_sort(days.begin(), days.end(),
                   [](const OccupancyProfile& a, const OccupancyProfile& b) {
                     if (a.date != b.date) return a.date < b.date;
                     return a.station < b.station;
                   });
  std::vector<int> starts;
  for (int h = config.start_lo; h <= config.start_hi; h += config.start_step) {
    starts.push_back(h);
  }

  // Prebuild every linreg pair before workers start reading the cache.
  if (models.linreg != nullptr) {
    std::vector<std::pair<int, int>> pairs;
    for (const int h : starts) {
      for (int y = h; y <= h + config.window; ++y) {
        pairs.emplace_back(std::min(h, y - 1), y);
      }
    }
    models.linreg->prebuild(pairs);
  }

  const std::size_t cells = days.size() * starts.size();
  std::vector<std::vector<SweepInstance>> slots(cells);
  const auto run_cell = [&](std::size_t index) {
    const std::size_t d = index / starts.size();
    const std::size_t s = index % starts.size();
    evaluate_cell(days[d], starts[s], models, config, slots[index]);
  };
  if (parallel) {
    parallel_for(cells, config.jobs, run_cell);
  } else {
    serial_for(cells, run_cell);
  }

  std::vector<SweepInstance> out;
  out.reserve(cells * 4);
  for (auto& cell : slots) {
    for (auto& inst : cell) out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

std::vector<SweepInstance> nowcast_sweep(
    std::span<const OccupancyProfile> test_raw, const SweepModels& models,
    const SweepConfig& config) {
  return run_sweep(test_raw, models, config, true);
}

std::vector<SweepInstance> nowcast_sweep_serial(
    std::span<const OccupancyProfile> test_raw, const SweepModels& models,
    const SweepConfig& config) {
  return run_sweep(test_raw, models, config, false);
}

DistSummary summarise(std::vector<double> values) {
  DistSummary s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  const std::size_t n = values.size();
  s.median = (n % 2 == 1) ? values[n / 2]
                          : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return values[n - 1];
    return values[lo] * (1.0 - w) + values[lo + 1] * w;
  };
  s.q25 = quantile(0.25);
  s.q75 = quantile(0.75);
  return s;
}

double win_rate(std::span<const double> a_errors,
                std::span<const double> b_errors) {
  if (a_errors.size() != b_errors.size()) {
    throw LengthMismatch("win_rate: paired series must have equal length");
  }
  if (a_errors.empty()) {
    throw InsufficientData("win_rate: no paired instances");
  }
  double wins = 0.0;
  for (std::size_t i = 0; i < a_errors.size(); ++i) {
    if (a_errors[i] < b_errors[i]) {
      wins += 1.0;
    } else if (a_errors[i] == b_errors[i]) {
      wins += 0.5;
    }
  }
  return wins / static_cast<double>(a_errors.size());
}

}  // namespace parkcast
