#include "duelbandits/lower_bound.hpp"

#include <algorithm>
#include <cmath>

#include "duelbandits/errors.hpp"

namespace duelbandits {

DeltaSchedule delta_schedule(std::size_t k, int rounds, std::int64_t horizon, DeltaExponent sign) {
  if (k < 2) throw DomainError("delta_schedule needs k >= 2");
  if (rounds < 1) throw DomainError("delta_schedule needs B >= 1");
  if (horizon < 1) throw DomainError("delta_schedule needs T >= 1");
  DeltaSchedule s{k, rounds, horizon, {}};
  const double base = std::sqrt(static_cast<double>(k)) / (24.0 * rounds);
  const double direction = sign == DeltaExponent::negative ? -1.0 : 1.0;
  for (int j = 1; j <= rounds; ++j) {
    const double exponent = direction * (j - 1) / (2.0 * rounds);
    s.deltas.push_back(std::min(0.25, base * std::pow(static_cast<double>(horizon), exponent)));
  }
  return s;
}

PreferenceMatrix instance_F(std::size_t k) {
  return PreferenceMatrix::from_flat(k, std::vector<double>(k * k, 0.5));
}

PreferenceMatrix instance_E(std::size_t k, Arm winner, double delta) {
  if (!(delta > 0.0 && delta <= 0.25)) throw RangeError("instance gap must lie in (0, 1/4]");
  return generate_condorcet_hard(k, delta, winner);
}

PreferenceMatrix instance_Q(std::size_t k, Arm k_arm, Arm l_arm, double delta) {
  if (!(delta > 0.0) || !(2.0 * delta < 0.5)) throw RangeError("instance Q needs 0 < 2 delta < 1/2");
  if (k < 2) throw DimensionError("instance Q needs k >= 2");
  if (k_arm >= k || l_arm >= k) throw RangeError("arm index out of range");
  if (k_arm == l_arm) return instance_E(k, k_arm, delta);
  std::vector<double> p(k * k, 0.5);
  auto set = [&](Arm i, Arm j, double v) {
    p[i * k + j] = v;
    p[j * k + i] = 1.0 - v;
  };
  for (Arm m = 0; m < k; ++m) {
    if (m != l_arm) set(l_arm, m, 0.5 + 2.0 * delta);
  }
  for (Arm m = 0; m < k; ++m) {
    if (m != l_arm && m != k_arm) set(k_arm, m, 0.5 + delta);
  }
  return PreferenceMatrix::from_flat(k, std::move(p));
}

}  // namespace duelbandits
