#include "duelbandits/batched.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "duelbandits/errors.hpp"

namespace duelbandits {

void AlgoParams::validate() const {
  if (rounds < 1) throw DomainError("rounds (B) must be >= 1");
  if (q && !(*q >= 1.0)) throw DomainError("q must be >= 1");
  if (tau < 1) throw DomainError("tau must be >= 1");
  if (delta && !(*delta > 0.0 && *delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  if (seed_prob && !(*seed_prob > 0.0 && *seed_prob <= 1.0)) throw DomainError("seed_prob must lie in (0,1]");
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0,1)");
  if (depth < 0) throw DomainError("depth (m) must be >= 0");
  if (forced_seed_set && forced_seed_set->empty()) throw DomainError("forced seed set must be non-empty");
}

void PairEstimates::begin_round() {
  std::fill(round_n_.begin(), round_n_.end(), 0);
  std::fill(round_w_.begin(), round_w_.end(), 0);
}

void PairEstimates::add(Arm i, Arm j, std::int64_t comparisons, std::int64_t i_wins) {
  const std::int64_t j_wins = comparisons - i_wins;
  round_n_[i * k_ + j] += comparisons;
  round_n_[j * k_ + i] += comparisons;
  round_w_[i * k_ + j] += i_wins;
  round_w_[j * k_ + i] += j_wins;
  total_n_[i * k_ + j] += comparisons;
  total_n_[j * k_ + i] += comparisons;
  total_w_[i * k_ + j] += i_wins;
  total_w_[j * k_ + i] += j_wins;
}

std::int64_t compute_cr(double q, int r, int tau) {
  const double v = std::pow(q, static_cast<double>(r + tau - 1));
  // Absorb pow() rounding so that q = T^(1/B) yields exactly T at the last round.
  const double floored = std::floor(v * (1.0 + 1e-12));
  if (!(floored < 9.0e18)) return std::numeric_limits<std::int64_t>::max() / 4;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(floored));
}

double compute_gamma(double delta, std::int64_t cr) {
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(cr)));
}

double binary_kl(double p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("binary_kl: q must lie in (0,1)");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary_kl: p must lie in [0,1]");
  double d = 0.0;
  if (p > 0.0) d += p * std::log(p / q);
  if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return std::max(0.0, d);
}

bool eliminates(const PairEstimates& est, Arm i, Arm j, const RoundRule& rule) {
  if (i == j) return false;
  if (rule.elimination == Elimination::hoeffding) {
    if (est.round_count(i, j) == 0) return false;
    return est.round_p(i, j) > 0.5 + rule.multiplier * rule.gamma;
  }
  const std::int64_t n = est.total_count(j, i);
  if (n == 0) return false;
  const double p = est.total_p(j, i);
  return p < 0.5 && static_cast<double>(n) * binary_kl(p, 0.5) > rule.kl_threshold;
}

std::vector<Arm> sample_seed_set(std::span<const Arm> arms, double prob, Rng& rng) {
  if (!(prob > 0.0 && prob <= 1.0)) throw DomainError("seed probability must lie in (0,1]");
  if (arms.empty()) return {};
  std::vector<Arm> seeds;
  while (seeds.empty()) {
    for (Arm a : arms) {
      if (rng.bernoulli(prob)) seeds.push_back(a);
    }
  }
  return seeds;
}

std::vector<Arm> sample_seed_set(std::size_t k, double prob, Rng& rng) {
  std::vector<Arm> all(k);
  for (Arm a = 0; a < k; ++a) all[a] = a;
  return sample_seed_set(all, prob, rng);
}

double default_delta_pcomp(std::int64_t t, std::size_t k, int rounds) {
  const double kk = static_cast<double>(k);
  return 1.0 / (6.0 * static_cast<double>(t) * kk * kk * rounds);
}

double default_delta_rscomp(std::int64_t t, std::size_t k, int rounds, int depth) {
  const double kk = static_cast<double>(k);
  return 1.0 / (2.0 * static_cast<double>(t) * kk * kk * (rounds + depth));
}

std::string to_string(Elimination e) { return e == Elimination::kl ? "kl" : "hoeffding"; }

namespace {

using ArmSet = std::vector<Arm>;  // kept sorted

bool contains(const ArmSet& s, Arm a) { return std::binary_search(s.begin(), s.end(), a); }

ArmSet minus(const ArmSet& s, const ArmSet& removed) {
  ArmSet out;
  std::set_difference(s.begin(), s.end(), removed.begin(), removed.end(), std::back_inserter(out));
  return out;
}

class BatchedRun {
 public:
  BatchedRun(Environment& env, const AlgoParams& params, double default_delta)
      : env_(env),
        params_(params),
        est_(env.arms()),
        start_batches_(env.batches()),
        start_used_(env.used()) {
    params_.validate();
    q_ = params.q.value_or(std::pow(static_cast<double>(env.budget()), 1.0 / params.rounds));
    delta_ = params.delta.value_or(default_delta);
    kl_threshold_ = params.kl_threshold.value_or(std::log(1.0 / delta_));
    if (params.forced_seed_set) {
      for (Arm a : *params.forced_seed_set) {
        if (a >= env.arms()) throw RangeError("forced seed arm out of range");
      }
    }
  }

  // All-pairs elimination; the first round uses exponent `tau`.
  void pcomp(ArmSet active, int tau) {
    active_ = std::move(active);
    for (int r = 1; !env_.exhausted(); ++r) {
      if (active_.size() == 1) return self_play(active_.front());
      const std::int64_t c = compute_cr(q_, r, tau);
      const RoundRule rule = make_rule(compute_gamma(delta_, c), 1.0);
      std::vector<std::pair<Arm, Arm>> pairs;
      for (std::size_t a = 0; a < active_.size(); ++a)
        for (std::size_t b = a + 1; b < active_.size(); ++b) pairs.emplace_back(active_[a], active_[b]);
      if (!compare(pairs, c)) return;

      ArmSet losers;
      for (Arm j : active_) {
        for (Arm i : active_) {
          if (eliminates(est_, i, j, rule)) {
            losers.push_back(j);
            break;
          }
        }
      }
      remove(losers, nullptr);
    }
  }

  // Seed-set phase shared by SCOMP (depth 1) and R-SCOMP (any depth >= 1).
  // On switching, recurses with depth - 1; depth 0 is all-pairs elimination.
  void seeded(ArmSet active, int tau, int depth, const std::function<double(std::size_t)>& seed_prob) {
    if (depth == 0) return pcomp(std::move(active), tau);
    active_ = std::move(active);
    ArmSet seeds = draw_seeds(seed_prob(active_.size()));
    for (int e = tau; !env_.exhausted(); ++e) {
      if (active_.size() == 1) return self_play(active_.front());
      const std::int64_t c = compute_cr(q_, e, 1);
      const double gamma = compute_gamma(delta_, c);
      const RoundRule rule = make_rule(gamma, 3.0);
      std::vector<std::pair<Arm, Arm>> pairs;
      for (Arm j : active_) {
        for (Arm i : seeds) {
          if (i != j) pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
      }
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
      if (!compare(pairs, c)) return;

      ArmSet losers;
      for (Arm j : active_) {
        for (Arm i : seeds) {
          if (eliminates(est_, i, j, rule)) {
            losers.push_back(j);
            break;
          }
        }
      }
      remove(losers, &seeds);

      // Switch when some active arm beats every seed by 3 gamma (vacuous once the seeds are gone).
      const double strong = 0.5 + 3.0 * gamma, weak = 0.5 + gamma;
      auto beats_all_seeds = [&](Arm j, double threshold) {
        if (contains(seeds, j)) return false;
        return std::all_of(seeds.begin(), seeds.end(), [&](Arm i) {
          return est_.round_count(j, i) > 0 && est_.round_p(j, i) > threshold;
        });
      };
      const bool trigger = seeds.empty() ||
                           std::any_of(active_.begin(), active_.end(), [&](Arm j) { return beats_all_seeds(j, strong); });
      if (!trigger) continue;
      ArmSet a_star;
      for (Arm j : active_) {
        if (seeds.empty() || beats_all_seeds(j, weak)) a_star.push_back(j);
      }
      hand_off(a_star, e);
      return seeded(std::move(a_star), e, depth - 1, seed_prob);
    }
  }

  void scomp2(ArmSet active, int tau, double seed_prob) {
    active_ = std::move(active);
    ArmSet seeds = draw_seeds(seed_prob);
    for (int e = tau; !env_.exhausted(); ++e) {
      if (active_.size() == 1) return self_play(active_.front());
      const std::int64_t c = compute_cr(q_, e, 1);
      const double gamma = compute_gamma(delta_, c);

      // First batch of the round: all pairs inside the seed set, then pick an undefeated candidate.
      Arm candidate = seeds.front();
      if (seeds.size() > 1) {
        std::vector<std::pair<Arm, Arm>> pairs;
        for (std::size_t a = 0; a < seeds.size(); ++a)
          for (std::size_t b = a + 1; b < seeds.size(); ++b) pairs.emplace_back(seeds[a], seeds[b]);
        if (!compare(pairs, c)) return;
        double best = std::numeric_limits<double>::infinity();
        for (Arm i : seeds) {
          double worst = 0.5;
          for (Arm j : seeds) {
            if (j != i) worst = std::max(worst, est_.round_p(j, i));
          }
          if (worst <= 0.5 + gamma) {
            candidate = i;
            break;
          }
          if (worst < best) {
            best = worst;
            candidate = i;
          }
        }
      }
      result_.candidate_history.push_back(candidate);

      // Second batch: the candidate against every other active arm.
      std::vector<std::pair<Arm, Arm>> pairs;
      for (Arm j : active_) {
        if (j != candidate) pairs.emplace_back(candidate, j);
      }
      if (!compare(pairs, c)) return;

      const RoundRule rule = make_rule(gamma, 5.0);
      ArmSet losers;
      for (Arm j : active_) {
        if (eliminates(est_, candidate, j, rule)) losers.push_back(j);
      }
      remove(losers, &seeds);

      auto beats_candidate = [&](Arm j, double threshold) {
        return j != candidate && est_.round_count(j, candidate) > 0 && est_.round_p(j, candidate) > threshold;
      };
      const bool trigger = std::any_of(active_.begin(), active_.end(),
                                       [&](Arm j) { return beats_candidate(j, 0.5 + 5.0 * gamma); });
      if (!trigger) continue;
      ArmSet a_star;
      for (Arm j : active_) {
        if (beats_candidate(j, 0.5 + 3.0 * gamma)) a_star.push_back(j);
      }
      hand_off(a_star, e);
      return pcomp(std::move(a_star), e);
    }
  }

  RunResult finish() {
    result_.trace = env_.trace();
    result_.batches_used = env_.batches() - start_batches_;
    result_.comparisons_used = env_.used() - start_used_;
    result_.final_regret = env_.cumulative_regret();
    result_.survivors = active_;
    return std::move(result_);
  }

 private:
  RoundRule make_rule(double gamma, double multiplier) const {
    return RoundRule{params_.elimination, gamma, multiplier, kl_threshold_};
  }

  ArmSet draw_seeds(double prob) {
    ArmSet seeds;
    if (params_.forced_seed_set && !forced_used_) {
      forced_used_ = true;
      for (Arm a : *params_.forced_seed_set) {
        if (contains(active_, a)) seeds.push_back(a);
      }
      std::sort(seeds.begin(), seeds.end());
      seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    }
    if (seeds.empty()) seeds = sample_seed_set(active_, prob, env_.policy_rng());
    result_.seed_sets.push_back(seeds);
    return seeds;
  }

  // Runs one batch; false once the budget is gone or the batch was cut short.
  bool compare(const std::vector<std::pair<Arm, Arm>>& pairs, std::int64_t c) {
    if (env_.exhausted() || pairs.empty()) return !env_.exhausted();
    std::vector<PairRequest> schedule;
    schedule.reserve(pairs.size());
    for (auto [i, j] : pairs) schedule.push_back({i, j, c});
    const BatchFeedback fb = env_.execute_batch(schedule);
    if (fb.truncated) return false;
    est_.begin_round();
    for (const auto& r : fb.results) est_.add(r.first, r.second, r.comparisons, r.first_wins);
    return true;
  }

  void self_play(Arm a) {
    if (env_.exhausted()) return;
    env_.execute_batch({{a, a, env_.remaining()}});
  }

  // Removes losers from the active set (and the seed set, if given). A round that would
  // empty the active set removes nobody.
  void remove(ArmSet losers, ArmSet* seeds) {
    std::sort(losers.begin(), losers.end());
    losers.erase(std::unique(losers.begin(), losers.end()), losers.end());
    if (losers.empty() || losers.size() >= active_.size()) return;
    for (Arm a : losers) result_.eliminations.push_back({env_.batches() - start_batches_, a});
    active_ = minus(active_, losers);
    if (seeds) *seeds = minus(*seeds, losers);
  }

  void hand_off(ArmSet& a_star, int round) {
    if (a_star.empty()) a_star = active_;
    for (Arm a : minus(active_, a_star)) result_.eliminations.push_back({env_.batches() - start_batches_, a});
    if (!result_.switch_round) result_.switch_round = round;
    result_.switch_rounds.push_back(round);
    result_.a_star_sets.push_back(a_star);
  }

  Environment& env_;
  AlgoParams params_;
  PairEstimates est_;
  std::int64_t start_batches_;
  std::int64_t start_used_;
  double q_ = 1.0;
  double delta_ = 0.5;
  double kl_threshold_ = 0.0;
  bool forced_used_ = false;
  ArmSet active_;
  RunResult result_;
};

ArmSet all_arms(const Environment& env) {
  ArmSet a(env.arms());
  for (Arm i = 0; i < a.size(); ++i) a[i] = i;
  return a;
}

}  // namespace

RunResult run_pcomp(Environment& env, const AlgoParams& params, std::vector<Arm> active) {
  BatchedRun run(env, params, default_delta_pcomp(env.budget(), env.arms(), params.rounds));
  if (active.empty()) {
    active = all_arms(env);
  } else {
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    if (active.back() >= env.arms()) throw RangeError("active arm out of range");
  }
  run.pcomp(std::move(active), params.tau);
  return run.finish();
}

RunResult run_scomp(Environment& env, const AlgoParams& params) {
  BatchedRun run(env, params, default_delta_pcomp(env.budget(), env.arms(), params.rounds));
  const double prob = params.seed_prob.value_or(1.0 / std::sqrt(static_cast<double>(env.arms())));
  run.seeded(all_arms(env), params.tau, 1, [prob](std::size_t) { return prob; });
  return run.finish();
}

RunResult run_scomp2(Environment& env, const AlgoParams& params) {
  BatchedRun run(env, params, default_delta_pcomp(env.budget(), env.arms(), params.rounds));
  const double prob = params.seed_prob.value_or(1.0 / std::sqrt(static_cast<double>(env.arms())));
  run.scomp2(all_arms(env), params.tau, prob);
  return run.finish();
}

RunResult run_rscomp(Environment& env, const AlgoParams& params) {
  BatchedRun run(env, params, default_delta_rscomp(env.budget(), env.arms(), params.rounds, params.depth));
  const double exponent = 1.0 - params.eta;
  const std::size_t original = env.arms();
  const SeedBase base = params.seed_base;
  run.seeded(all_arms(env), params.tau, params.depth, [=](std::size_t current) {
    const std::size_t k = base == SeedBase::current_active ? current : original;
    return 1.0 / std::pow(static_cast<double>(k), exponent);
  });
  return run.finish();
}

}  // namespace duelbandits
