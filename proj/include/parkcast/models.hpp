#pragma once

#include <array>

#include "parkcast/grid.hpp"
#include "parkcast/truncnorm.hpp"

namespace parkcast {

/// Shared arrival/departure parameters, all in unit-day fractions.
struct TnParams {
  double mu_a = 0.3;
  double sigma_a = 0.05;
  double mu_d = 0.75;
  double sigma_d = 0.10;
};

struct TnlParams {
  TnParams tn;
  double tau = 1.0;  // fraction of the day's demand that fits, in (0, 1]
};

/// Occupancy curve of the unconstrained model: arrivals minus departures,
/// f(t) = Phi_a(t) - Phi_d(t).
class TnModel {
 public:
  explicit TnModel(const TnParams& p);

  double value(double t) const {
    return arrival_.cdf(t) - departure_.cdf(t);
  }

  /// Curve sampled at the 48 end-of-interval grid points.
  std::array<double, kSlotsPerDay> grid() const;

  const TruncNorm& arrival() const { return arrival_; }
  const TruncNorm& departure() const { return departure_; }
  const TnParams& params() const { return params_; }

 private:
  TnParams params_;
  TruncNorm arrival_;
  TruncNorm departure_;
};

/// Capacity-limited curve: arrivals saturate once a fraction tau of the
/// demand has been admitted, f(t) = min(Phi_a(t)/tau, 1) - Phi_d(t).
class TnlModel {
 public:
  /// Throws InvalidParams unless tau lies in (0, 1].
  TnlModel(const TnParams& p, double tau);
  explicit TnlModel(const TnlParams& p) : TnlModel(p.tn, p.tau) {}

  double value(double t) const {
    const double a = arrival_.cdf(t) / tau_;
    return (a < 1.0 ? a : 1.0) - departure_.cdf(t);
  }

  std::array<double, kSlotsPerDay> grid() const;

  /// First time the capacity limit binds: Phi_a(t_L) = tau.
  double saturation_time() const { return arrival_.quantile(tau_); }

  double tau() const { return tau_; }
  const TruncNorm& arrival() const { return arrival_; }
  const TruncNorm& departure() const { return departure_; }
  const TnParams& params() const { return params_; }

 private:
  TnParams params_;
  double tau_;
  TruncNorm arrival_;
  TruncNorm departure_;
};

}  // namespace parkcast
