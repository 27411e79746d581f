#include "parkcast/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "parkcast/errors.hpp"
#include "parkcast/log.hpp"
#include "parkcast/optim.hpp"
#include "parkcast/parallel.hpp"
#include "parkcast/truncnorm.hpp"

namespace parkcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTauLo = 0.05;
constexpr double kTauTol = 1e-6;
constexpr double kTauWarmRadius = 0.2;

const double kMuAStarts[] = {0.25, 0.33, 0.42};
const double kMuDStarts[] = {0.67, 0.75, 0.83};
constexpr double kSigmaAStart = 0.05;
constexpr double kSigmaDStart = 0.10;
constexpr int kStartCount = 9;

struct StartResult {
  NelderMeadResult nm;
  double sigma_sum = kInf;
};

TnParams unpack(std::span<const double> x) {
  return TnParams{x[0], std::exp(x[1]), x[2], std::exp(x[3])};
}

bool fill_cdf_grids(const TnParams& p, std::array<double, kSlotsPerDay>& arr,
                    std::array<double, kSlotsPerDay>& dep) {
  if (!std::isfinite(p.mu_a) || !std::isfinite(p.mu_d) || !(p.sigma_a > 0.0) ||
      !(p.sigma_d > 0.0) || p.sigma_a > 1e4 || p.sigma_d > 1e4) {
    return false;
  }
  try {
    const TruncNorm a(p.mu_a, p.sigma_a);
    const TruncNorm d(p.mu_d, p.sigma_d);
    for (int i = 1; i <= kSlotsPerDay; ++i) {
      const double t = grid_time(i);
      arr[i - 1] = a.cdf(t);
      dep[i - 1] = d.cdf(t);
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

/// Sorted copy so accumulation order, and therefore every fitted bit, is
/// independent of the caller's profile order.
std::vector<OccupancyProfile> sorted_training_set(
    std::span<const OccupancyProfile> train, Normalisation expected,
    const char* who) {
  if (train.size() < 5) {
    throw InsufficientData(std::string(who) + ": needs at least 5 profiles, got " +
                           std::to_string(train.size()));
  }
  const DayClass day_class = train.front().day_class;
  for (const auto& p : train) {
    if (p.values.size() != static_cast<std::size_t>(kSlotsPerDay)) {
      throw LengthMismatch(std::string(who) + ": profile must have 48 slots");
    }
    if (p.day_class != day_class) {
      throw InvalidParams(std::string(who) + ": profiles mix day classes");
    }
    if (p.normalisation != expected) {
      throw InvalidParams(std::string(who) + ": profiles must use " +
                          (expected == Normalisation::Area ? "area" : "max") +
                          " normalisation");
    }
  }
  std::vector<OccupancyProfile> sorted(train.begin(), train.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const OccupancyProfile& a, const OccupancyProfile& b) {
                     if (a.date != b.date) return a.date < b.date;
                     return a.station < b.station;
                   });
  return sorted;
}

std::vector<std::array<double, 4>> start_points() {
  std::vector<std::array<double, 4>> starts;
  starts.reserve(kStartCount);
  for (const double ma : kMuAStarts) {
    for (const double md : kMuDStarts) {
      starts.push_back({ma, std::log(kSigmaAStart), md, std::log(kSigmaDStart)});
    }
  }
  return starts;
}

/// Runs the objective from every start; results land in start-indexed slots
/// so the parallel path reproduces the serial reference bit for bit.
template <typename MakeObjective>
std::vector<StartResult> run_starts(const MakeObjective& make_objective,
                                    const FitOptions& options) {
  const auto starts = start_points();
  std::vector<StartResult> results(starts.size());
  const NelderMeadOptions nm_options{options.max_iterations, options.diameter_tol};
  const std::array<double, 4> steps = {0.05, 0.3, 0.05, 0.3};

  const auto run_one = [&](std::size_t s) {
    auto objective = make_objective();
    results[s].nm = nelder_mead(objective, starts[s], steps, nm_options);
    const TnParams p = unpack(results[s].nm.x);
    results[s].sigma_sum = p.sigma_a + p.sigma_d;
  };

  if (resolve_jobs(options.jobs) == 1) {
    serial_for(starts.size(), run_one);
  } else {
    parallel_for(starts.size(), options.jobs, run_one);
  }
  return results;
}

int pick_winner(const std::vector<StartResult>& results, const char* who) {
  int winner = -1;
  for (int s = 0; s < static_cast<int>(results.size()); ++s) {
    if (!std::isfinite(results[s].nm.fx)) continue;
    if (winner < 0) {
      winner = s;
      continue;
    }
    const auto& best = results[winner];
    const auto& cand = results[s];
    if (cand.nm.fx < best.nm.fx ||
        (cand.nm.fx == best.nm.fx && cand.sigma_sum < best.sigma_sum)) {
      winner = s;
    }
  }
  if (winner < 0) {
    throw OptimizerDiverged(std::string(who) +
                            ": no start produced a finite loss");
  }
  return winner;
}

std::vector<double> running_minimum(const std::vector<StartResult>& results) {
  std::vector<double> trace;
  double best = kInf;
  for (const auto& r : results) {
    for (const double v : r.nm.best_trace) {
      best = std::min(best, v);
      trace.push_back(best);
    }
  }
  return trace;
}

bool params_non_interpretable(const TnParams& p) {
  return p.mu_a < 0.0 || p.mu_a > 1.0 || p.mu_d < 0.0 || p.mu_d > 1.0 ||
         p.sigma_a > 1.0 || p.sigma_d > 1.0;
}

/// Squared-error of one day against the TNL curve for a given tau, using
/// precomputed arrival/departure CDF grids.
double tnl_day_loss(const std::vector<double>& obs,
                    const std::array<double, kSlotsPerDay>& arr,
                    const std::array<double, kSlotsPerDay>& dep, double tau) {
  double sum = 0.0;
  for (int i = 0; i < kSlotsPerDay; ++i) {
    const double a = arr[i] / tau;
    const double f = (a < 1.0 ? a : 1.0) - dep[i];
    const double r = obs[i] - f;
    sum += r * r;
  }
  return sum;
}

double solve_tau_full(const std::vector<double>& obs,
                      const std::array<double, kSlotsPerDay>& arr,
                      const std::array<double, kSlotsPerDay>& dep) {
  return golden_section(
      [&](double tau) { return tnl_day_loss(obs, arr, dep, tau); }, kTauLo, 1.0,
      kTauTol);
}

/// Warm-started tau solve: searches a bracket around the previous optimum
/// and falls back to the full interval when the minimum lands on an
/// interior bracket edge.
double solve_tau_warm(const std::vector<double>& obs,
                      const std::array<double, kSlotsPerDay>& arr,
                      const std::array<double, kSlotsPerDay>& dep,
                      double warm) {
  const double lo = std::max(kTauLo, warm - kTauWarmRadius);
  const double hi = std::min(1.0, warm + kTauWarmRadius);
  const double tau = golden_section(
      [&](double t) { return tnl_day_loss(obs, arr, dep, t); }, lo, hi, kTauTol);
  const bool on_lo_edge = tau - lo < 2 * kTauTol && lo > kTauLo;
  const bool on_hi_edge = hi - tau < 2 * kTauTol && hi < 1.0;
  if (on_lo_edge || on_hi_edge) {
    return solve_tau_full(obs, arr, dep);
  }
  return tau;
}

}  // namespace

LossBreakdown loss(std::span<const OccupancyProfile> profiles,
                   std::span<const double> curve) {
  if (curve.size() != static_cast<std::size_t>(kSlotsPerDay)) {
    throw LengthMismatch("loss: curve must have 48 values");
  }
  if (profiles.empty()) {
    throw InsufficientData("loss: no profiles");
  }
  LossBreakdown out;
  for (const auto& p : profiles) {
    if (p.values.size() != static_cast<std::size_t>(kSlotsPerDay)) {
      throw LengthMismatch("loss: profile must have 48 slots");
    }
    for (int i = 0; i < kSlotsPerDay; ++i) {
      const double r = p.values[i] - curve[i];
      out.total += r * r;
    }
  }
  out.per_day = out.total / static_cast<double>(profiles.size());
  return out;
}

std::array<double, kSlotsPerDay> tn_curve_grid(const TnParams& p) {
  return TnModel(p).grid();
}

std::array<double, kSlotsPerDay> tn_curve_grid_normalised(const TnParams& p) {
  auto g = tn_curve_grid(p);
  const double sum = std::accumulate(g.begin(), g.end(), 0.0);
  if (!(sum > 0.0)) {
    throw DegenerateSupport("tn curve has no positive mass on the grid");
  }
  for (double& v : g) v /= sum;
  return g;
}

std::array<double, kSlotsPerDay> tnl_curve_grid(const TnParams& p, double tau) {
  return TnlModel(p, tau).grid();
}

TnFit fit_tn(std::span<const OccupancyProfile> train, const FitOptions& options) {
  const auto sorted = sorted_training_set(train, Normalisation::Area, "fit_tn");
  const int n = static_cast<int>(sorted.size());

  // Per-slot data sums make the objective O(T) per evaluation; the constant
  // term keeps the value equal (up to rounding) to the naive accumulation.
  std::array<double, kSlotsPerDay> slot_sum{};
  double data_sq = 0.0;
  for (const auto& p : sorted) {
    for (int i = 0; i < kSlotsPerDay; ++i) {
      slot_sum[i] += p.values[i];
      data_sq += p.values[i] * p.values[i];
    }
  }

  const auto make_objective = [&]() {
    return [&](std::span<const double> x) -> double {
      const TnParams p = unpack(x);
      std::array<double, kSlotsPerDay> arr, dep;
      if (!fill_cdf_grids(p, arr, dep)) return kInf;
      double curve_sum = 0.0;
      for (int i = 0; i < kSlotsPerDay; ++i) curve_sum += arr[i] - dep[i];
      if (!(curve_sum > 1e-12)) return kInf;
      double value = data_sq;
      for (int i = 0; i < kSlotsPerDay; ++i) {
        const double g = (arr[i] - dep[i]) / curve_sum;
        value += g * (n * g - 2.0 * slot_sum[i]);
      }
      return value;
    };
  };

  const auto results = run_starts(make_objective, options);
  const int winner = pick_winner(results, "fit_tn");
  const auto& best = results[winner];

  TnFit fit;
  fit.params = unpack(best.nm.x);
  fit.n_profiles = n;
  fit.winner_start = winner;
  fit.iterations = best.nm.iterations;
  fit.converged = best.nm.converged;
  fit.best_so_far = running_minimum(results);
  fit.non_interpretable = params_non_interpretable(fit.params);
  const auto curve = tn_curve_grid_normalised(fit.params);
  const LossBreakdown breakdown = loss(sorted, curve);
  fit.total_loss = breakdown.total;
  fit.loss_per_day = breakdown.per_day;
  fit.beta2 = breakdown.total / (static_cast<double>(n) * kSlotsPerDay);
  if (fit.non_interpretable) {
    log_warn("fit_tn: parameters are outside interpretable ranges; reported verbatim");
  }
  return fit;
}

TnlFit fit_tnl(std::span<const OccupancyProfile> train, const FitOptions& options) {
  const auto sorted = sorted_training_set(train, Normalisation::Max, "fit_tnl");
  const int n = static_cast<int>(sorted.size());

  // Each start owns its warm-start tau state, captured by value in the
  // objective, so starts stay independent under parallel execution.
  const auto make_objective = [&]() {
    std::vector<double> warm(n, -1.0);
    return [&sorted, warm, n](std::span<const double> x) mutable -> double {
      const TnParams p = unpack(x);
      std::array<double, kSlotsPerDay> arr, dep;
      if (!fill_cdf_grids(p, arr, dep)) return kInf;
      double total = 0.0;
      for (int d = 0; d < n; ++d) {
        const auto& obs = sorted[d].values;
        const double tau = warm[d] < 0.0
                               ? solve_tau_full(obs, arr, dep)
                               : solve_tau_warm(obs, arr, dep, warm[d]);
        warm[d] = tau;
        total += tnl_day_loss(obs, arr, dep, tau);
      }
      return total;
    };
  };

  const auto results = run_starts(make_objective, options);
  const int winner = pick_winner(results, "fit_tnl");
  const auto& best = results[winner];

  TnlFit fit;
  fit.params = unpack(best.nm.x);
  fit.n_profiles = n;
  fit.winner_start = winner;
  fit.iterations = best.nm.iterations;
  fit.converged = best.nm.converged;
  fit.best_so_far = running_minimum(results);
  fit.non_interpretable = params_non_interpretable(fit.params);

  // Canonical per-day taus: full-bracket solves at the final parameters.
  std::array<double, kSlotsPerDay> arr, dep;
  if (!fill_cdf_grids(fit.params, arr, dep)) {
    throw OptimizerDiverged("fit_tnl: winner parameters are not evaluable");
  }
  fit.tau_per_day.reserve(n);
  double tau_sum = 0.0;
  double total = 0.0;
  for (int d = 0; d < n; ++d) {
    const double tau = solve_tau_full(sorted[d].values, arr, dep);
    fit.tau_per_day.emplace_back(sorted[d].date, tau);
    tau_sum += tau;
    total += tnl_day_loss(sorted[d].values, arr, dep, tau);
  }
  fit.mean_tau = tau_sum / n;
  fit.total_loss = total;
  fit.loss_per_day = total / n;
  fit.beta2 = total / (static_cast<double>(n) * kSlotsPerDay);
  if (fit.non_interpretable) {
    log_warn("fit_tnl: parameters are outside interpretable ranges; reported verbatim");
  }
  return fit;
}

}  // namespace parkcast
