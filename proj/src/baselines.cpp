#include "parkcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parkcast/errors.hpp"
#include "parkcast/grid.hpp"

namespace parkcast {

namespace {

/// Solves (A + lambda I) x = b for symmetric positive semi-definite A by
/// Cholesky factorisation in place.
std::vector<double> solve_regularised(std::vector<std::vector<double>> a,
                                      std::vector<double> b, double lambda) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i) a[i][i] += lambda;
  // Cholesky: a = L L^T, lower triangle kept in a.
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (!(d > 0.0)) {
      throw SingularFit("linreg: normal equations are not positive definite");
    }
    a[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i][k] * b[k];
    b[i] = s / a[i][i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k][ii] * b[k];
    b[ii] = s / a[ii][ii];
  }
  return b;
}

}  // namespace

double AverageProfile::value_at(double t) const {
  const double pos = t * kSlotsPerDay;  // grid index space, slot i at pos i
  if (pos <= 1.0) return values.front();
  if (pos >= kSlotsPerDay) return values.back();
  const int lo = static_cast<int>(pos);  // >= 1
  const double w = pos - lo;
  return values[lo - 1] * (1.0 - w) + values[lo] * w;
}

AverageProfile build_average(std::span<const OccupancyProfile> train,
                             DayClass day_class) {
  AverageProfile avg;
  avg.day_class = day_class;
  avg.values.assign(kSlotsPerDay, 0.0);
  for (const auto& p : train) {
    if (p.day_class != day_class) continue;
    if (p.values.size() != static_cast<std::size_t>(kSlotsPerDay)) {
      throw LengthMismatch("build_average: profile must have 48 slots");
    }
    for (int i = 0; i < kSlotsPerDay; ++i) avg.values[i] += p.values[i];
    ++avg.n_days;
  }
  if (avg.n_days == 0) {
    throw InsufficientData("build_average: no profiles of the requested class");
  }
  for (double& v : avg.values) v /= avg.n_days;
  return avg;
}

PredictionFit condition_average(std::span<const double> obs,
                                const AverageProfile& average) {
  const std::size_t h = obs.size();
  if (h > average.values.size()) {
    throw LengthMismatch("condition_average: prefix longer than one day");
  }
  std::vector<double> curve(h);
  for (std::size_t i = 0; i < h; ++i) {
    curve[i] = average.values[i];
  }
  return condition_curve(obs, curve);
}

std::vector<double> predict_average_grid(const PredictionFit& fit,
                                         const AverageProfile& average) {
  std::vector<double> out(kSlotsPerDay);
  for (int i = 0; i < kSlotsPerDay; ++i) {
    out[i] = fit.beta0 + fit.beta1 * average.values[i];
  }
  return out;
}

std::vector<double> diff_inputs(std::span<const double> obs, int x) {
  if (x < 1 || static_cast<std::size_t>(x) > obs.size()) {
    throw InvalidParams("diff_inputs: prefix length out of range");
  }
  std::vector<double> out(x);
  out[0] = 0.0;
  for (int i = 1; i < x; ++i) out[i] = obs[i] - obs[i - 1];
  return out;
}

LinRegModel fit_linreg(std::span<const OccupancyProfile> train, int x, int y,
                       double lambda) {
  if (x < 1 || y <= x || y > kSlotsPerDay) {
    throw InvalidParams("fit_linreg: requires 1 <= x < y <= 48 (x=" +
                        std::to_string(x) + ", y=" + std::to_string(y) + ")");
  }
  const std::size_t n = train.size();
  if (n < 3) {
    throw InsufficientData("fit_linreg: needs at least 3 profiles, got " +
                           std::to_string(n));
  }
  const int p = x + 1;  // intercept + x diff inputs
  std::vector<std::vector<double>> gram(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  std::vector<double> row(p);
  for (const auto& profile : train) {
    if (profile.values.size() != static_cast<std::size_t>(kSlotsPerDay)) {
      throw LengthMismatch("fit_linreg: profile must have 48 slots");
    }
    row[0] = 1.0;
    const auto inputs = diff_inputs(profile.values, x);
    std::copy(inputs.begin(), inputs.end(), row.begin() + 1);
    const double target = profile.values[y - 1];
    for (int i = 0; i < p; ++i) {
      for (int j = i; j < p; ++j) gram[i][j] += row[i] * row[j];
      rhs[i] += row[i] * target;
    }
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) gram[i][j] = gram[j][i];
  }

  LinRegModel model;
  model.x = x;
  model.y = y;
  model.underdetermined = n < static_cast<std::size_t>(x) + 2;
  model.coef = solve_regularised(std::move(gram), std::move(rhs), lambda);
  return model;
}

double predict_linreg(const LinRegModel& model,
                      std::span<const double> obs_prefix) {
  if (obs_prefix.size() < static_cast<std::size_t>(model.x)) {
    throw LengthMismatch("predict_linreg: prefix shorter than model window");
  }
  const auto inputs = diff_inputs(obs_prefix, model.x);
  double value = model.coef[0];
  for (int i = 0; i < model.x; ++i) value += model.coef[i + 1] * inputs[i];
  return value;
}

LinRegCache::LinRegCache(std::vector<OccupancyProfile> train, double lambda)
    : train_(std::move(train)), lambda_(lambda) {}

const LinRegModel& LinRegCache::get(int x, int y) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_pair(x, y);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, fit_linreg(train_, x, y, lambda_)).first;
  }
  return it->second;
}

void LinRegCache::prebuild(std::span<const std::pair<int, int>> pairs) {
  for (const auto& [x, y] : pairs) get(x, y);
}

}  // namespace parkcast
