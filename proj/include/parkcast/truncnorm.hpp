#pragma once

#include <cstdint>
#include <vector>

namespace parkcast {

struct TruncNormParams {
  double mu = 0.5;
  double sigma = 0.1;
};

/// Normal distribution truncated to the unit interval [0, 1].
///
/// mu may lie anywhere on the real line and sigma in (0, 1e4]; evaluation
/// stays finite even when the support mass under the untruncated normal is
/// far below the smallest positive double. Phi is evaluated through the
/// complementary error function, and the truncation denominator is carried
/// in log space whenever both tail arguments are large, so out-of-support
/// parameter sets remain usable.
class TruncNorm {
 public:
  /// Throws InvalidParams for sigma outside (0, 1e4] or non-finite mu/sigma,
  /// DegenerateSupport when the denominator is not representable in log space.
  TruncNorm(double mu, double sigma);
  explicit TruncNorm(const TruncNormParams& p) : TruncNorm(p.mu, p.sigma) {}

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

  /// Density at t; zero outside [0, 1].
  double pdf(double t) const;

  /// Distribution function at t; clamped to [0, 1] outside the support.
  double cdf(double t) const;

  /// Inverse of cdf by bracketed bisection on [0, 1], 64 iterations.
  /// Requires q in [0, 1].
  double quantile(double q) const;

  /// n inverse-CDF draws from a seeded generator; identical sequences for
  /// identical (n, seed).
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

  /// log of the truncation denominator Phi(beta) - Phi(alpha).
  double log_denominator() const { return log_z_; }

 private:
  double mu_;
  double sigma_;
  double alpha_;       // (0 - mu) / sigma
  double beta_;        // (1 - mu) / sigma
  double log_z_;       // log(Phi(beta) - Phi(alpha))
  double log_cdf_alpha_;
  double log_sf_beta_;
};

/// log Phi(x) for the standard normal, accurate over the full double range.
double log_norm_cdf(double x);

/// Standard normal CDF via erfc (underflows to 0 below x ~ -37.5).
double norm_cdf(double x);

}  // namespace parkcast
