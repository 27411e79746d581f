#pragma once

#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "parkcast/data.hpp"
#include "parkcast/forecast.hpp"

namespace parkcast {

/// Pointwise mean of same-class training profiles on the 48-slot grid,
/// evaluated between slots by linear interpolation.
struct AverageProfile {
  DayClass day_class = DayClass::Weekday;
  int n_days = 0;
  std::vector<double> values;  // kSlotsPerDay entries

  /// Piecewise-linear value at unit-day time t; flat beyond the grid ends.
  double value_at(double t) const;
};

/// Builds the average from profiles of the given day class; requires at
/// least one matching profile and a shared normalisation.
AverageProfile build_average(std::span<const OccupancyProfile> train,
                             DayClass day_class);

/// Conditions the average-profile shape on the first h observed slots.
PredictionFit condition_average(std::span<const double> obs,
                                const AverageProfile& average);

/// Conditioned average-profile curve over the 48 grid slots.
std::vector<double> predict_average_grid(const PredictionFit& fit,
                                         const AverageProfile& average);

/// Regression of slot y on the diff-transformed prefix of length x:
/// inputs are {0, o_2 - o_1, ..., o_x - o_{x-1}} plus an intercept.
struct LinRegModel {
  int x = 0;
  int y = 0;
  std::vector<double> coef;  // intercept, then x diff coefficients
  /// Set when there were fewer than x+2 training days and the Tikhonov
  /// term alone made the system solvable.
  bool underdetermined = false;
};

/// Fits by normal equations with Tikhonov regularisation lambda on the
/// diagonal. Requires 1 <= x < y <= 48 and at least 3 training profiles.
LinRegModel fit_linreg(std::span<const OccupancyProfile> train, int x, int y,
                       double lambda = 1e-8);

/// Applies the model to one day's first x (or more) observed slots.
double predict_linreg(const LinRegModel& model,
                      std::span<const double> obs_prefix);

/// Diff transform used by the regressors: {0, diff(o_1..o_x)}.
std::vector<double> diff_inputs(std::span<const double> obs, int x);

/// Lazily built, mutex-guarded store of per-(x, y) models; prebuild() fills
/// the pairs a sweep needs before parallel workers start reading.
class LinRegCache {
 public:
  explicit LinRegCache(std::vector<OccupancyProfile> train, double lambda = 1e-8);

  const LinRegModel& get(int x, int y);
  void prebuild(std::span<const std::pair<int, int>> pairs);

 private:
  std::vector<OccupancyProfile> train_;
  double lambda_;
  std::map<std::pair<int, int>, LinRegModel> cache_;
  std::mutex mutex_;
};

}  // namespace parkcast
