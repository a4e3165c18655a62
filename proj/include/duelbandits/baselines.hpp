#pragma once

#include "duelbandits/batched.hpp"
#include "duelbandits/environment.hpp"

namespace duelbandits {

// Parameters of the fully sequential comparators.
struct BaselineParams {
  double alpha = 0.51;     // RUCB exploration
  double f_scale = 0.3;    // RMED1: f(K) = f_scale * K^f_exp
  double f_exp = 1.01;
  double btm_gamma = 1.3;  // Beat-the-Mean relaxation factor
  // Beat-the-Mean confidence radius c(n) = btm_scale * sqrt(ln(1/btm_delta) / n).
  // Unset: btm_scale = 3 * gamma^7 and btm_delta = 1 / (2 T K).
  std::optional<double> btm_scale;
  std::optional<double> btm_delta;

  void validate() const;
};

// Relative Upper Confidence Bound.
RunResult run_rucb(Environment& env, const BaselineParams& params = {});

// Relative Minimum Empirical Divergence, variant 1.
RunResult run_rmed1(Environment& env, const BaselineParams& params = {});

// Beat-the-Mean: explore until a single arm remains, then play it against itself.
RunResult run_btm(Environment& env, const BaselineParams& params = {});

}  // namespace duelbandits
