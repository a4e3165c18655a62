#pragma once

#include <cstdint>
#include <vector>

#include "duelbandits/preference.hpp"

namespace duelbandits {

enum class DeltaExponent { negative, positive };

// Gap schedule of the adversarial family, one gap per batch index j = 1..B.
struct DeltaSchedule {
  std::size_t k = 0;
  int rounds = 0;
  std::int64_t horizon = 0;
  std::vector<double> deltas;
};

// delta_j = min(1/4, sqrt(K) / (24 B) * T^(-(j-1)/(2B))). The positive exponent variant is
// available for comparison; it is clipped the same way.
DeltaSchedule delta_schedule(std::size_t k, int rounds, std::int64_t horizon,
                             DeltaExponent sign = DeltaExponent::negative);

// Every entry 1/2.
PreferenceMatrix instance_F(std::size_t k);

// `winner` beats every other arm with probability 1/2 + delta; other pairs even.
PreferenceMatrix instance_E(std::size_t k, Arm winner, double delta);

// Arm `l` is the Condorcet winner with margin 2 delta over everyone; arm `k_arm` beats the
// remaining arms with margin delta; every other pair is even. Requires delta in (0, 1/4).
PreferenceMatrix instance_Q(std::size_t k, Arm k_arm, Arm l_arm, double delta);

}  // namespace duelbandits
