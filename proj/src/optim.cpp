#include "parkcast/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parkcast/errors.hpp"

namespace parkcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double guarded(const std::function<double(std::span<const double>)>& f,
               std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, std::span<const double> steps,
    const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0 || steps.size() != n) {
    throw InvalidParams("nelder_mead: empty start point or step size mismatch");
  }

  std::vector<std::vector<double>> simplex(n + 1,
                                           std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += steps[i];
  }
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    values[i] = guarded(f, simplex[i]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), reflected(n), trial(n);
  NelderMeadResult result;
  result.best_trace.reserve(options.max_iterations);

  const auto sort_order = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b];
    });
  };

  const auto diameter = [&]() {
    const auto& best = simplex[order[0]];
    double d = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        d = std::max(d, std::fabs(simplex[i][k] - best[k]));
      }
    }
    return d;
  };

  sort_order();
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    if (diameter() < options.diameter_tol) {
      result.converged = true;
      break;
    }

    const std::size_t worst = order[n];
    const std::size_t second_worst = order[n - 1];
    const std::size_t best = order[0];

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
    }
    for (std::size_t k = 0; k < n; ++k) centroid[k] /= static_cast<double>(n);

    for (std::size_t k = 0; k < n; ++k) {
      reflected[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
    }
    const double f_reflected = guarded(f, reflected);

    if (f_reflected < values[best]) {
      for (std::size_t k = 0; k < n; ++k) {
        trial[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
      }
      const double f_expanded = guarded(f, trial);
      if (f_expanded < f_reflected) {
        simplex[worst] = trial;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
    } else if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < values[worst];
      if (outside) {
        for (std::size_t k = 0; k < n; ++k) {
          trial[k] = centroid[k] + 0.5 * (reflected[k] - centroid[k]);
        }
      } else {
        for (std::size_t k = 0; k < n; ++k) {
          trial[k] = centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
        }
      }
      const double f_trial = guarded(f, trial);
      const double bar = outside ? f_reflected : values[worst];
      if (f_trial <= bar) {
        simplex[worst] = trial;
        values[worst] = f_trial;
      } else {
        // Shrink towards the best vertex; the best value never worsens.
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) {
            simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          }
          values[i] = guarded(f, simplex[i]);
        }
      }
    }

    sort_order();
    result.best_trace.push_back(values[order[0]]);
  }

  result.x = simplex[order[0]];
  result.fx = values[order[0]];
  result.iterations = iteration;
  return result;
}

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol) {
  if (!(lo < hi)) {
    throw InvalidParams("golden_section: requires lo < hi");
  }
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace parkcast
