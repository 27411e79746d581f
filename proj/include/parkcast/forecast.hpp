#pragma once

#include <optional>
#include <span>
#include <vector>

#include "parkcast/models.hpp"

namespace parkcast {

/// Affine conditioning of a trained shape on one partial day:
/// prediction(t) = beta0 + beta1 * f(t) for the unconstrained forms.
struct PredictionFit {
  double beta0 = 0.0;
  double beta1 = 1.0;
  /// Last slot of the regression window (1-based).
  int window_end = 0;
  /// Set when beta1 came out non-positive and was refit at epsilon.
  bool low_signal = false;
  /// Capacity-limited extras (absent for plain curve conditioning).
  std::optional<double> tau_i;
  std::optional<double> t_l;  // saturation time, present iff tau_i < 1
  std::optional<double> excess;
  std::optional<double> capacity_proxy;
};

/// Closed-form least squares of obs against curve values over the same
/// slots (both spanning slots 1..h). Throws SingularFit when the curve is
/// constant over the window, InsufficientData when h < 3. A non-positive
/// slope is replaced by epsilon with low_signal set.
PredictionFit condition_curve(std::span<const double> obs,
                              std::span<const double> curve);

/// Conditions the TN shape on the first h observed slots.
PredictionFit condition_tn(std::span<const double> obs, const TnModel& model);

/// Conditions the capacity-limited shape: fits (beta0, beta1) against the
/// arrival CDF on slots up to min(h, t_m), where t_m is the first slot
/// attaining the prefix maximum. tau_i = (capacity_proxy - beta0)/beta1
/// clamped to (0, 1]; excess = max(0, beta0 + beta1 - capacity_proxy).
PredictionFit condition_tnl(std::span<const double> obs, const TnModel& model,
                            double capacity_proxy);

/// Unmet-demand estimate against an observed maximum: beta1 + beta0 -
/// max_obs, floored at zero.
double excess_estimate(const PredictionFit& fit, double max_obs);

/// Conditioned TN curve over the 48 grid slots.
std::vector<double> predict_tn_grid(const PredictionFit& fit,
                                    const TnModel& model);

/// Conditioned TNL curve over the 48 grid slots:
/// beta0 + beta1*min(Phi_a(t), tau_i) - (capacity_proxy - beta0)*Phi_d(t).
std::vector<double> predict_tnl_grid(const PredictionFit& fit,
                                     const TnModel& model);

/// Mean absolute nowcast error over slots h..h+w inclusive, as a
/// percentage of max_t: sum |o_t - pred_t| / (w * max_t) * 100.
double nowcast_error(std::span<const double> obs,
                     std::span<const double> predicted, int h, int w,
                     double max_t);

}  // namespace parkcast
