#include "duelbandits/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "duelbandits/errors.hpp"

namespace duelbandits {

void BaselineParams::validate() const {
  if (!(alpha > 0.5)) throw DomainError("RUCB alpha must exceed 1/2");
  if (!(f_scale > 0.0)) throw DomainError("RMED1 f_scale must be positive");
  if (!(btm_gamma >= 1.0)) throw DomainError("BTM gamma must be >= 1");
  if (btm_scale && !(*btm_scale > 0.0)) throw DomainError("BTM confidence scale must be positive");
  if (btm_delta && !(*btm_delta > 0.0 && *btm_delta < 1.0)) throw DomainError("BTM delta must lie in (0,1)");
}

namespace {

// Pairwise win counts; wins(i, j) counts wins of i over j.
class DuelStats {
 public:
  explicit DuelStats(std::size_t k) : k_(k), wins_(k * k, 0) {}

  void record(Arm i, Arm j, Outcome o) {
    if (i == j) return;
    if (o == Outcome::first_wins) ++wins_[i * k_ + j];
    else ++wins_[j * k_ + i];
  }
  std::int64_t wins(Arm i, Arm j) const { return wins_[i * k_ + j]; }
  std::int64_t count(Arm i, Arm j) const { return wins_[i * k_ + j] + wins_[j * k_ + i]; }
  double mean(Arm i, Arm j) const {
    const std::int64_t n = count(i, j);
    return n == 0 ? 0.5 : static_cast<double>(wins(i, j)) / static_cast<double>(n);
  }

 private:
  std::size_t k_;
  std::vector<std::int64_t> wins_;
};

RunResult collect(const Environment& env, std::vector<Arm> survivors) {
  RunResult res;
  res.trace = env.trace();
  res.comparisons_used = env.used();
  res.batches_used = env.used();
  res.final_regret = env.cumulative_regret();
  res.survivors = std::move(survivors);
  return res;
}

}  // namespace

RunResult run_rucb(Environment& env, const BaselineParams& params) {
  params.validate();
  const std::size_t k = env.arms();
  DuelStats stats(k);
  Rng& rng = env.policy_rng();
  constexpr double kNever = -std::numeric_limits<double>::infinity();

  // u(c, j) >= 1/2 holds iff ln t >= block(c, j); block_max[c] decides membership in C.
  auto block = [&](Arm c, Arm j) {
    const std::int64_t n = stats.count(c, j);
    if (c == j || n == 0) return kNever;
    const double gap = 0.5 - stats.mean(c, j);
    if (gap <= 0.0) return kNever;
    return static_cast<double>(n) * gap * gap / params.alpha;
  };
  std::vector<double> block_max(k, kNever);
  auto refresh = [&](Arm c) {
    double m = kNever;
    for (Arm j = 0; j < k; ++j) m = std::max(m, block(c, j));
    block_max[c] = m;
  };

  std::optional<Arm> hypothesis;  // the set B of the original algorithm, at most one arm
  Arm last_c = 0;
  std::vector<Arm> candidates, ties;
  while (!env.exhausted()) {
    const double t = static_cast<double>(env.used() + 1);
    const double log_t = std::log(t);

    candidates.clear();
    for (Arm c = 0; c < k; ++c) {
      if (block_max[c] <= log_t) candidates.push_back(c);
    }
    Arm c = 0;
    if (candidates.empty()) {
      hypothesis.reset();
      c = static_cast<Arm>(rng.below(k));
    } else {
      if (hypothesis && !std::binary_search(candidates.begin(), candidates.end(), *hypothesis)) hypothesis.reset();
      if (candidates.size() == 1) {
        hypothesis = candidates.front();
        c = candidates.front();
      } else if (hypothesis && rng.bernoulli(0.5)) {
        c = *hypothesis;
      } else {
        // Uniform over C \ B.
        const std::size_t others = candidates.size() - (hypothesis ? 1 : 0);
        std::size_t pick = rng.below(others);
        for (Arm a : candidates) {
          if (hypothesis && a == *hypothesis) continue;
          if (pick-- == 0) {
            c = a;
            break;
          }
        }
      }
    }

    // d = argmax_j u(j, c), ties broken uniformly; u(c, c) = 1/2.
    double best = -1.0;
    ties.clear();
    for (Arm j = 0; j < k; ++j) {
      double u = 0.5;
      if (j != c) {
        const std::int64_t n = stats.count(j, c);
        u = n == 0 ? 1.0 : stats.mean(j, c) + std::sqrt(params.alpha * log_t / static_cast<double>(n));
      }
      if (u > best) {
        best = u;
        ties.assign(1, j);
      } else if (u == best) {
        ties.push_back(j);
      }
    }
    const Arm d = ties[rng.below(ties.size())];

    const Outcome o = env.duel(c, d);
    stats.record(c, d, o);
    if (c != d) {
      refresh(c);
      refresh(d);
    }
    last_c = c;
  }
  return collect(env, {last_c});
}

RunResult run_rmed1(Environment& env, const BaselineParams& params) {
  params.validate();
  const std::size_t k = env.arms();
  const double f_k = params.f_scale * std::pow(static_cast<double>(k), params.f_exp);
  DuelStats stats(k);

  auto play = [&](Arm i, Arm j) { stats.record(i, j, env.duel(i, j)); };

  // Initial phase: every pair once.
  for (Arm i = 0; i < k && !env.exhausted(); ++i)
    for (Arm j = i + 1; j < k && !env.exhausted(); ++j) play(i, j);

  // I(i) = sum over empirical opponents j (mean(i, j) <= 1/2) of N(i, j) * d(mean(i, j), 1/2).
  std::vector<double> divergence(k, 0.0);
  auto refresh = [&](Arm i) {
    double s = 0.0;
    for (Arm j = 0; j < k; ++j) {
      if (j == i) continue;
      const std::int64_t n = stats.count(i, j);
      const double mu = stats.mean(i, j);
      if (n > 0 && mu <= 0.5) s += static_cast<double>(n) * binary_kl(mu, 0.5);
    }
    divergence[i] = s;
  };
  for (Arm i = 0; i < k; ++i) refresh(i);
  auto best_arm = [&] {
    return static_cast<Arm>(std::min_element(divergence.begin(), divergence.end()) - divergence.begin());
  };

  std::vector<Arm> current(k);
  for (Arm i = 0; i < k; ++i) current[i] = i;
  std::vector<char> remaining(k, 1), next(k, 0);
  while (!env.exhausted()) {
    for (Arm l : current) {
      if (env.exhausted()) break;
      const Arm leader = best_arm();
      bool has_opponent = false, leader_beats_l = false;
      for (Arm j = 0; j < k; ++j) {
        if (j != l && stats.count(l, j) > 0 && stats.mean(l, j) <= 0.5) {
          has_opponent = true;
          if (j == leader) leader_beats_l = true;
        }
      }
      Arm m = leader;
      if (has_opponent && !leader_beats_l) {
        double lowest = std::numeric_limits<double>::infinity();
        for (Arm j = 0; j < k; ++j) {
          if (j != l && stats.mean(l, j) < lowest) {
            lowest = stats.mean(l, j);
            m = j;
          }
        }
      }
      play(l, m);
      if (l != m) {
        refresh(l);
        refresh(m);
      }
      remaining[l] = 0;
      const double floor_div = divergence[best_arm()];
      const double slack = std::log(static_cast<double>(env.used())) + f_k;
      for (Arm j = 0; j < k; ++j) {
        if (!remaining[j] && !next[j] && divergence[j] - floor_div <= slack) next[j] = 1;
      }
    }
    current.clear();
    for (Arm j = 0; j < k; ++j) {
      remaining[j] = next[j];
      if (next[j]) current.push_back(j);
      next[j] = 0;
    }
    if (current.empty()) current.push_back(best_arm());
  }
  return collect(env, {best_arm()});
}

RunResult run_btm(Environment& env, const BaselineParams& params) {
  params.validate();
  const std::size_t k = env.arms();
  const double scale = params.btm_scale.value_or(3.0 * std::pow(params.btm_gamma, 7.0));
  const double delta = params.btm_delta.value_or(1.0 / (2.0 * static_cast<double>(env.budget()) * static_cast<double>(k)));
  const double log_inv_delta = std::log(1.0 / delta);
  Rng& rng = env.policy_rng();

  // Per (b, opponent) records so an eliminated opponent's comparisons can be retracted.
  std::vector<std::int64_t> wins(k * k, 0), plays(k * k, 0);
  std::vector<std::int64_t> w(k, 0), n(k, 0);
  std::vector<Arm> working(k);
  for (Arm i = 0; i < k; ++i) working[i] = i;
  std::vector<Arm> ties;

  while (working.size() > 1 && !env.exhausted()) {
    std::int64_t fewest = std::numeric_limits<std::int64_t>::max();
    ties.clear();
    for (Arm b : working) {
      if (n[b] < fewest) {
        fewest = n[b];
        ties.assign(1, b);
      } else if (n[b] == fewest) {
        ties.push_back(b);
      }
    }
    const Arm b = ties[rng.below(ties.size())];
    // Opponent drawn uniformly from the other working arms.
    const auto pos_b = static_cast<std::size_t>(std::find(working.begin(), working.end(), b) - working.begin());
    const std::size_t pick = rng.below(working.size() - 1);
    const Arm opp = working[pick >= pos_b ? pick + 1 : pick];

    const bool b_wins = env.duel(b, opp) == Outcome::first_wins;
    ++plays[b * k + opp];
    ++n[b];
    if (b_wins) {
      ++wins[b * k + opp];
      ++w[b];
    }

    std::int64_t n_min = std::numeric_limits<std::int64_t>::max();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    Arm worst = working.front();
    for (Arm a : working) {
      n_min = std::min(n_min, n[a]);
      const double p = n[a] == 0 ? 0.5 : static_cast<double>(w[a]) / static_cast<double>(n[a]);
      if (p < lo) {
        lo = p;
        worst = a;
      }
      hi = std::max(hi, p);
    }
    const double radius = n_min == 0 ? 1.0 : scale * std::sqrt(log_inv_delta / static_cast<double>(n_min));
    if (lo + radius <= hi - radius) {
      working.erase(std::find(working.begin(), working.end(), worst));
      for (Arm a : working) {
        w[a] -= wins[a * k + worst];
        n[a] -= plays[a * k + worst];
      }
    }
  }
  if (!env.exhausted()) {
    const Arm last = working.front();
    while (!env.exhausted()) env.duel(last, last);
  }
  return collect(env, working);
}

}  // namespace duelbandits
