#include "parkcast/models.hpp"

#include <string>

#include "parkcast/errors.hpp"

namespace parkcast {

TnModel::TnModel(const TnParams& p)
    : params_(p),
      arrival_(p.mu_a, p.sigma_a),
      departure_(p.mu_d, p.sigma_d) {}

std::array<double, kSlotsPerDay> TnModel::grid() const {
  std::array<double, kSlotsPerDay> out;
  for (int i = 1; i <= kSlotsPerDay; ++i) {
    out[i - 1] = value(grid_time(i));
  }
  return out;
}

TnlModel::TnlModel(const TnParams& p, double tau)
    : params_(p),
      tau_(tau),
      arrival_(p.mu_a, p.sigma_a),
      departure_(p.mu_d, p.sigma_d) {
  if (!(tau > 0.0) || tau > 1.0) {
    throw InvalidParams("tnl: tau must lie in (0, 1], got " + std::to_string(tau));
  }
}

std::array<double, kSlotsPerDay> TnlModel::grid() const {
  std::array<double, kSlotsPerDay> out;
  for (int i = 1; i <= kSlotsPerDay; ++i) {
    out[i - 1] = value(grid_time(i));
  }
  return out;
}

}  // namespace parkcast
