#pragma once

#include <functional>
#include <span>
#include <vector>

namespace parkcast {

struct NelderMeadOptions {
  int max_iterations = 2000;
  double diameter_tol = 1e-7;  // infinity-norm simplex diameter
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Best objective value after each iteration; non-increasing.
  std::vector<double> best_trace;
};

/// Minimises f by the Nelder-Mead simplex method with standard coefficients
/// (reflect 1, expand 2, contract 0.5, shrink 0.5). The initial simplex is
/// x0 plus steps[i] along each axis. Stops when the simplex diameter falls
/// below diameter_tol or after max_iterations. Non-finite objective values
/// are treated as +infinity.
NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, std::span<const double> steps,
    const NelderMeadOptions& options = {});

/// Minimises a unimodal f on [lo, hi] by golden-section search until the
/// bracket is shorter than tol; returns the bracket midpoint.
double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol);

}  // namespace parkcast
