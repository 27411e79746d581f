#include "parkcast/truncnorm.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "parkcast/errors.hpp"

namespace parkcast {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kSigmaMax = 1e4;

// log(exp(a) - exp(b)) for a > b, stable when the arguments are close.
double log_sub_exp(double a, double b) {
  const double d = b - a;  // <= 0
  if (d > -0.6931471805599453) {
    return a + std::log(-std::expm1(d));
  }
  return a + std::log1p(-std::exp(d));
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_norm_cdf(double x) {
  if (x > 8.0) {
    // Phi(x) = 1 - Phi(-x); the complement is tiny, log1p keeps precision.
    return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  }
  if (x > -20.0) {
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  // Deep lower tail: asymptotic expansion of Mills' ratio,
  // Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8).
  const double z = 1.0 / (x * x);
  const double series = z * (-1.0 + z * (3.0 + z * (-15.0 + z * 105.0)));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log1p(series);
}

TruncNorm::TruncNorm(double mu, double sigma) : mu_(mu), sigma_(sigma) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0) ||
      sigma > kSigmaMax) {
    throw InvalidParams("truncnorm: sigma must lie in (0, 1e4] and mu be finite (mu=" +
                        std::to_string(mu) + ", sigma=" + std::to_string(sigma) + ")");
  }
  alpha_ = (0.0 - mu) / sigma;
  beta_ = (1.0 - mu) / sigma;
  if (!std::isfinite(alpha_) || !std::isfinite(beta_)) {
    throw InvalidParams("truncnorm: tail arguments overflow for mu=" +
                        std::to_string(mu) + ", sigma=" + std::to_string(sigma));
  }
  log_cdf_alpha_ = log_norm_cdf(alpha_);
  log_sf_beta_ = log_norm_cdf(-beta_);
  if (alpha_ >= 0.0) {
    // Both tails right of the mean: Z = Phi(-alpha) - Phi(-beta).
    log_z_ = log_sub_exp(log_norm_cdf(-alpha_), log_sf_beta_);
  } else if (beta_ <= 0.0) {
    // Both tails left of the mean: Z = Phi(beta) - Phi(alpha).
    log_z_ = log_sub_exp(log_norm_cdf(beta_), log_cdf_alpha_);
  } else {
    // Support straddles the mean; the difference is well conditioned.
    log_z_ = std::log(norm_cdf(beta_) - norm_cdf(alpha_));
  }
  if (!std::isfinite(log_z_)) {
    throw DegenerateSupport(
        "truncnorm: truncation denominator underflows in log space for mu=" +
        std::to_string(mu) + ", sigma=" + std::to_string(sigma));
  }
}

double TruncNorm::pdf(double t) const {
  if (t < 0.0 || t > 1.0) return 0.0;
  const double u = (t - mu_) / sigma_;
  const double log_pdf = -0.5 * u * u - std::log(sigma_) - kLogSqrt2Pi - log_z_;
  return std::exp(log_pdf);
}

double TruncNorm::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double u = (t - mu_) / sigma_;
  double log_num;
  if (alpha_ >= 0.0) {
    // Numerator Phi(u) - Phi(alpha) = Phi(-alpha) - Phi(-u).
    log_num = log_sub_exp(log_norm_cdf(-alpha_), log_norm_cdf(-u));
  } else if (u <= 0.0) {
    log_num = log_sub_exp(log_norm_cdf(u), log_cdf_alpha_);
  } else {
    const double num = norm_cdf(u) - norm_cdf(alpha_);
    log_num = std::log(num);
  }
  if (log_num == -std::numeric_limits<double>::infinity()) return 0.0;
  const double value = std::exp(log_num - log_z_);
  if (value <= 0.0) return 0.0;
  if (value >= 1.0) return 1.0;
  return value;
}

double TruncNorm::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidParams("truncnorm: quantile level must lie in [0, 1], got " +
                        std::to_string(q));
  }
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 64; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> TruncNorm::sample(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 gen(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // 53-bit mantissa uniform in [0, 1); implementation-independent, unlike
    // std::uniform_real_distribution.
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    out[i] = quantile(u);
  }
  return out;
}

}  // namespace parkcast
