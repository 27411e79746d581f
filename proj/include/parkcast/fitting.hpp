#pragma once

#include <array>
#include <chrono>
#include <span>
#include <utility>
#include <vector>

#include "parkcast/data.hpp"
#include "parkcast/models.hpp"

namespace parkcast {

struct FitOptions {
  /// Worker cap for the multi-start evaluations; 0 = all available, 1 = the
  /// serial reference path.
  int jobs = 0;
  int max_iterations = 2000;
  double diameter_tol = 1e-7;
};

struct LossBreakdown {
  double total = 0.0;
  double per_day = 0.0;  // total / N
};

/// Sum of squared residuals between every profile and the curve sampled at
/// the 48 grid points; accumulated day by day in the given order.
LossBreakdown loss(std::span<const OccupancyProfile> profiles,
                   std::span<const double> curve);

/// Raw TN curve at the 48 grid points.
std::array<double, kSlotsPerDay> tn_curve_grid(const TnParams& p);

/// TN curve normalised by its own slot sum; the shape fitted against
/// area-normalised profiles, so both sides carry unit slot sum.
std::array<double, kSlotsPerDay> tn_curve_grid_normalised(const TnParams& p);

/// Raw TNL curve at the 48 grid points.
std::array<double, kSlotsPerDay> tnl_curve_grid(const TnParams& p, double tau);

struct TnFit {
  TnParams params;
  double total_loss = 0.0;
  double loss_per_day = 0.0;
  double beta2 = 0.0;  // total_loss / (N * T)
  int n_profiles = 0;
  int winner_start = -1;
  int iterations = 0;
  bool converged = false;
  /// Fitted values outside sensible day ranges (mu outside [0,1] or
  /// sigma > 1); reported verbatim but flagged.
  bool non_interpretable = false;
  /// Best-so-far objective across all starts in start order, then within a
  /// start in iteration order; non-increasing.
  std::vector<double> best_so_far;
};

struct TnlFit {
  TnParams params;
  std::vector<std::pair<std::chrono::sys_days, double>> tau_per_day;
  double mean_tau = 1.0;
  double total_loss = 0.0;
  double loss_per_day = 0.0;
  double beta2 = 0.0;
  int n_profiles = 0;
  int winner_start = -1;
  int iterations = 0;
  bool converged = false;
  bool non_interpretable = false;
  std::vector<double> best_so_far;
};

/// Least-squares fit of the TN curve to area-normalised profiles of one day
/// class. Nine Nelder-Mead starts over (mu_a, log sigma_a, mu_d, log
/// sigma_d); the best final loss wins, ties preferring smaller
/// sigma_a + sigma_d, then the lower start index. Requires >= 5 profiles,
/// one shared day class, Area normalisation.
TnFit fit_tn(std::span<const OccupancyProfile> train, const FitOptions& = {});

/// Least-squares fit of the TNL curve to max-normalised profiles: shared
/// (mu_a, sigma_a, mu_d, sigma_d) via Nelder-Mead, one tau per day via an
/// inner golden-section search on [0.05, 1] warm-started across outer
/// iterations. Reported taus are re-solved on the full bracket at the final
/// parameters.
TnlFit fit_tnl(std::span<const OccupancyProfile> train, const FitOptions& = {});

}  // namespace parkcast
