#include "parkcast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parkcast/errors.hpp"
#include "parkcast/grid.hpp"

namespace parkcast {

namespace {

constexpr double kEpsilonSlope = 1e-6;
constexpr double kTauFloor = 1e-6;
constexpr double kSingularVariance = 1e-18;

}  // namespace

PredictionFit condition_curve(std::span<const double> obs,
                              std::span<const double> curve) {
  const std::size_t h = obs.size();
  if (h < 3) {
    throw InsufficientData("condition: needs at least 3 observed slots, got " +
                           std::to_string(h));
  }
  if (curve.size() != h) {
    throw LengthMismatch("condition: curve window must match observations");
  }
  const double n = static_cast<double>(h);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    sx += curve[i];
    sy += obs[i];
    sxx += curve[i] * curve[i];
    sxy += curve[i] * obs[i];
  }
  const double var = sxx - sx * sx / n;  // n * Var(curve)
  if (!(var > kSingularVariance)) {
    throw SingularFit("condition: curve is constant over the window");
  }
  PredictionFit fit;
  fit.window_end = static_cast<int>(h);
  fit.beta1 = (sxy - sx * sy / n) / var;
  fit.beta0 = (sy - fit.beta1 * sx) / n;
  if (fit.beta1 <= 0.0) {
    fit.beta1 = kEpsilonSlope;
    fit.beta0 = (sy - fit.beta1 * sx) / n;
    fit.low_signal = true;
  }
  return fit;
}

PredictionFit condition_tn(std::span<const double> obs, const TnModel& model) {
  const std::size_t h = obs.size();
  std::vector<double> curve(h);
  for (std::size_t i = 0; i < h; ++i) {
    curve[i] = model.value(grid_time(static_cast<int>(i) + 1));
  }
  return condition_curve(obs, curve);
}

PredictionFit condition_tnl(std::span<const double> obs, const TnModel& model,
                            double capacity_proxy) {
  const std::size_t h = obs.size();
  if (h < 3) {
    throw InsufficientData("condition_tnl: needs at least 3 observed slots");
  }
  if (!(capacity_proxy > 0.0)) {
    throw InvalidParams("condition_tnl: capacity proxy must be positive");
  }
  // t_m: first slot attaining the prefix maximum; the regression window
  // stops there so saturated slots do not bend the arrival fit.
  std::size_t t_m = 0;
  for (std::size_t i = 1; i < h; ++i) {
    if (obs[i] > obs[t_m]) t_m = i;
  }
  const std::size_t window = std::min(h, t_m + 1);

  std::vector<double> curve(window);
  for (std::size_t i = 0; i < window; ++i) {
    curve[i] = model.arrival().cdf(grid_time(static_cast<int>(i) + 1));
  }
  PredictionFit fit = condition_curve(obs.first(window), curve);
  fit.window_end = static_cast<int>(window);
  fit.capacity_proxy = capacity_proxy;

  double tau = (capacity_proxy - fit.beta0) / fit.beta1;
  tau = std::clamp(tau, kTauFloor, 1.0);
  fit.tau_i = tau;
  if (tau < 1.0) {
    fit.t_l = model.arrival().quantile(tau);
  }
  fit.excess = std::max(0.0, fit.beta0 + fit.beta1 - capacity_proxy);
  return fit;
}

double excess_estimate(const PredictionFit& fit, double max_obs) {
  return std::max(0.0, fit.beta1 + fit.beta0 - max_obs);
}

std::vector<double> predict_tn_grid(const PredictionFit& fit,
                                    const TnModel& model) {
  std::vector<double> out(kSlotsPerDay);
  for (int i = 1; i <= kSlotsPerDay; ++i) {
    out[i - 1] = fit.beta0 + fit.beta1 * model.value(grid_time(i));
  }
  return out;
}

std::vector<double> predict_tnl_grid(const PredictionFit& fit,
                                     const TnModel& model) {
  if (!fit.tau_i || !fit.capacity_proxy) {
    throw InvalidParams("predict_tnl: fit does not carry tau/capacity");
  }
  const double tau = *fit.tau_i;
  const double peak = *fit.capacity_proxy - fit.beta0;
  std::vector<double> out(kSlotsPerDay);
  for (int i = 1; i <= kSlotsPerDay; ++i) {
    const double t = grid_time(i);
    const double admitted = std::min(model.arrival().cdf(t), tau);
    out[i - 1] =
        fit.beta0 + fit.beta1 * admitted - peak * model.departure().cdf(t);
  }
  return out;
}

double nowcast_error(std::span<const double> obs,
                     std::span<const double> predicted, int h, int w,
                     double max_t) {
  if (obs.size() != predicted.size()) {
    throw LengthMismatch("nowcast_error: series lengths differ");
  }
  if (h < 1 || w < 1 || h + w > static_cast<int>(obs.size())) {
    throw InvalidParams("nowcast_error: window [h, h+w] must fit in the day");
  }
  if (!(max_t > 0.0)) {
    throw InvalidParams("nowcast_error: max_t must be positive");
  }
  double sum = 0.0;
  for (int t = h; t <= h + w; ++t) {
    sum += std::fabs(obs[t - 1] - predicted[t - 1]);
  }
  return sum / (static_cast<double>(w) * max_t) * 100.0;
}

}  // namespace parkcast
