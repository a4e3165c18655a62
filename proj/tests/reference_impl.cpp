#include "reference_impl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "duelbandits/environment.hpp"
#include "duelbandits/rng.hpp"

namespace reference {

using duelbandits::Arm;
using Pair = std::pair<Arm, Arm>;
using ArmSet = std::set<Arm>;

namespace {

struct Interpreter {
  const duelbandits::PreferenceMatrix& m;
  std::int64_t T;
  std::uint64_t duel_seed;
  duelbandits::Rng policy;
  duelbandits::AlgoParams p;
  std::string algo;

  double q = 1.0, delta = 0.5, kl_threshold = 0.0;
  std::vector<double> eps;
  std::map<Pair, std::int64_t> tape_position;  // comparisons made so far per unordered pair
  std::map<Pair, std::pair<std::int64_t, std::int64_t>> pooled;  // ordered pair -> (count, wins)
  std::map<Pair, std::pair<std::int64_t, std::int64_t>> fresh;   // last batch only
  bool forced_pending = false;
  Result out;

  Interpreter(const duelbandits::PreferenceMatrix& matrix, std::int64_t horizon, std::uint64_t seed,
              const duelbandits::AlgoParams& params, std::string name)
      : m(matrix),
        T(horizon),
        duel_seed(duelbandits::derive_seed(seed, {1})),
        policy(duelbandits::derive_seed(seed, {2})),
        p(params),
        algo(std::move(name)) {
    const double K = static_cast<double>(m.size());
    q = p.q ? *p.q : std::pow(static_cast<double>(T), 1.0 / p.rounds);
    if (p.delta) {
      delta = *p.delta;
    } else if (algo == "rscomp") {
      delta = 1.0 / (2.0 * T * K * K * (p.rounds + p.depth));
    } else {
      delta = 1.0 / (6.0 * T * K * K * p.rounds);
    }
    kl_threshold = p.kl_threshold ? *p.kl_threshold : std::log(1.0 / delta);
    forced_pending = p.forced_seed_set.has_value();
    // gaps from the first arm that weakly beats everyone
    Arm w = 0;
    for (Arm i = 0; i < m.size(); ++i) {
      bool ok = true;
      for (Arm j = 0; j < m.size(); ++j) ok = ok && (i == j || m(i, j) >= 0.5);
      if (ok) {
        w = i;
        break;
      }
    }
    for (Arm j = 0; j < m.size(); ++j) eps.push_back(j == w ? 0.0 : m(w, j) - 0.5);
  }

  std::int64_t c_of(int exponent) const {
    const double v = std::floor(std::pow(q, exponent) * (1.0 + 1e-12));
    return v < 1.0 ? 1 : static_cast<std::int64_t>(v);
  }

  double gamma_of(std::int64_t c) const { return std::sqrt(std::log(1.0 / delta) / (2.0 * c)); }

  // One comparison of i against j; true when i wins.
  bool compare_once(Arm i, Arm j) {
    out.used += 1;
    out.regret += (eps[i] + eps[j]) / 2.0;
    if (i == j) return true;
    const Arm lo = i < j ? i : j, hi = i < j ? j : i;
    const std::int64_t n = tape_position[{lo, hi}]++;
    const bool lo_wins = duelbandits::comparison_variate(duel_seed, lo, hi, n) < m(lo, hi);
    return lo_wins == (i == lo);
  }

  // Runs every listed pair c times; false if the budget ran out part way.
  bool batch(const std::vector<Pair>& pairs, std::int64_t c) {
    if (pairs.empty()) return true;
    fresh.clear();
    bool any = false, complete = true;
    for (const auto& [i, j] : pairs) {
      for (std::int64_t t = 0; t < c; ++t) {
        if (out.used >= T) {
          complete = false;
          break;
        }
        any = true;
        const bool i_wins = compare_once(i, j);
        for (auto* table : {&fresh, &pooled}) {
          (*table)[{i, j}].first += 1;
          (*table)[{j, i}].first += 1;
          (*table)[{i_wins ? i : j, i_wins ? j : i}].second += 1;
        }
      }
    }
    if (any) out.batches += 1;
    return complete;
  }

  void self_play(Arm a) {
    if (out.used >= T) return;
    out.batches += 1;
    while (out.used < T) compare_once(a, a);
  }

  double fresh_p(Arm i, Arm j) {
    const auto& e = fresh[{i, j}];
    return static_cast<double>(e.second) / static_cast<double>(e.first);
  }

  bool beats(Arm i, Arm j, double multiplier, double gamma) {
    if (i == j) return false;
    if (p.elimination == duelbandits::Elimination::hoeffding) {
      if (fresh[{i, j}].first == 0) return false;
      return fresh_p(i, j) > 0.5 + multiplier * gamma;
    }
    const auto& e = pooled[{j, i}];
    if (e.first == 0) return false;
    const double pj = static_cast<double>(e.second) / static_cast<double>(e.first);
    return pj < 0.5 && e.first * duelbandits::binary_kl(pj, 0.5) > kl_threshold;
  }

  ArmSet draw_seeds(const ArmSet& A, double prob) {
    ArmSet S;
    if (forced_pending) {
      forced_pending = false;
      for (Arm a : *p.forced_seed_set)
        if (A.count(a)) S.insert(a);
    }
    while (S.empty()) {
      for (Arm a : A)
        if (policy.uniform() < prob) S.insert(a);
    }
    out.seed_sets.push_back(S);
    return S;
  }

  void drop(ArmSet& A, ArmSet* S, const ArmSet& losers) {
    if (losers.empty() || losers.size() >= A.size()) return;
    for (Arm a : losers) {
      out.eliminations.push_back({out.batches, a});
      A.erase(a);
      if (S) S->erase(a);
    }
  }

  void switch_to(ArmSet& A, ArmSet& a_star) {
    if (a_star.empty()) a_star = A;
    for (Arm a : A)
      if (!a_star.count(a)) out.eliminations.push_back({out.batches, a});
    out.a_stars.push_back(a_star);
  }

  // Pure elimination over A from schedule offset tau.
  ArmSet pcomp(ArmSet A, int tau) {
    for (int r = 1; out.used < T; ++r) {
      if (A.size() == 1) {
        self_play(*A.begin());
        break;
      }
      const std::int64_t c = c_of(r + tau - 1);
      const double g = gamma_of(c);
      std::vector<Pair> pairs;
      for (Arm i : A)
        for (Arm j : A)
          if (i < j) pairs.push_back({i, j});
      if (!batch(pairs, c)) break;
      ArmSet losers;
      for (Arm j : A)
        for (Arm i : A)
          if (beats(i, j, 1.0, g)) losers.insert(j);
      drop(A, nullptr, losers);
    }
    return A;
  }

  double seed_prob(std::size_t active) const {
    if (algo == "rscomp") {
      const double base = p.seed_base == duelbandits::SeedBase::original ? m.size() : active;
      return 1.0 / std::pow(base, 1.0 - p.eta);
    }
    return p.seed_prob ? *p.seed_prob : 1.0 / std::sqrt(static_cast<double>(m.size()));
  }

  // Algorithms 2 and 4
  ArmSet seeded(ArmSet A, int tau, int depth) {
    if (depth == 0) return pcomp(A, tau);
    ArmSet S = draw_seeds(A, seed_prob(A.size()));
    for (int r = tau; out.used < T; ++r) {
      if (A.size() == 1) {
        self_play(*A.begin());
        break;
      }
      const std::int64_t c = c_of(r);
      const double g = gamma_of(c);
      std::set<Pair> pairs;
      for (Arm i : S)
        for (Arm j : A)
          if (i != j) pairs.insert({std::min(i, j), std::max(i, j)});
      if (!batch({pairs.begin(), pairs.end()}, c)) break;
      ArmSet losers;
      for (Arm j : A)
        for (Arm i : S)
          if (beats(i, j, 3.0, g)) losers.insert(j);
      drop(A, &S, losers);

      bool trigger = S.empty();
      for (Arm j : A) {
        if (S.count(j)) continue;
        bool all = true;
        for (Arm i : S) all = all && fresh_p(j, i) > 0.5 + 3.0 * g;
        trigger = trigger || all;
      }
      if (!trigger) continue;
      ArmSet a_star;
      for (Arm j : A) {
        if (S.count(j)) continue;
        bool all = true;
        for (Arm i : S) all = all && fresh_p(j, i) > 0.5 + g;
        if (all) a_star.insert(j);
      }
      if (S.empty()) a_star = A;
      switch_to(A, a_star);
      return seeded(a_star, r, depth - 1);
    }
    return A;
  }

  // Seed-candidate variant.
  ArmSet scomp2(ArmSet A, int tau) {
    ArmSet S = draw_seeds(A, seed_prob(A.size()));
    for (int r = tau; out.used < T; ++r) {
      if (A.size() == 1) {
        self_play(*A.begin());
        break;
      }
      const std::int64_t c = c_of(r);
      const double g = gamma_of(c);
      Arm cand = *S.begin();
      if (S.size() > 1) {
        std::vector<Pair> pairs;
        for (Arm i : S)
          for (Arm j : S)
            if (i < j) pairs.push_back({i, j});
        if (!batch(pairs, c)) break;
        std::optional<Arm> undefeated;
        Arm least_beaten = *S.begin();
        double least = 2.0;
        for (Arm i : S) {
          double worst = 0.0;
          for (Arm j : S)
            if (j != i) worst = std::max(worst, fresh_p(j, i));
          if (worst <= 0.5 + g) {
            undefeated = i;
            break;
          }
          if (worst < least) {
            least = worst;
            least_beaten = i;
          }
        }
        cand = undefeated ? *undefeated : least_beaten;
      }
      out.candidates.push_back(cand);

      std::vector<Pair> pairs;
      for (Arm j : A)
        if (j != cand) pairs.push_back({cand, j});
      if (!batch(pairs, c)) break;
      ArmSet losers;
      for (Arm j : A)
        if (beats(cand, j, 5.0, g)) losers.insert(j);
      drop(A, &S, losers);

      bool trigger = false;
      for (Arm j : A)
        if (j != cand && fresh_p(j, cand) > 0.5 + 5.0 * g) trigger = true;
      if (!trigger) continue;
      ArmSet a_star;
      for (Arm j : A)
        if (j != cand && fresh_p(j, cand) > 0.5 + 3.0 * g) a_star.insert(j);
      switch_to(A, a_star);
      return pcomp(a_star, r);
    }
    return A;
  }
};

}  // namespace

Result run(const std::string& algo, const duelbandits::PreferenceMatrix& m, std::int64_t horizon, std::uint64_t seed,
           const duelbandits::AlgoParams& params) {
  Interpreter in(m, horizon, seed, params, algo);
  ArmSet all;
  for (Arm a = 0; a < m.size(); ++a) all.insert(a);
  if (algo == "pcomp") in.out.survivors = in.pcomp(all, params.tau);
  else if (algo == "scomp") in.out.survivors = in.seeded(all, params.tau, 1);
  else if (algo == "scomp2") in.out.survivors = in.scomp2(all, params.tau);
  else in.out.survivors = in.seeded(all, params.tau, params.depth);
  return in.out;
}

std::string mismatch(const duelbandits::RunResult& fast, const Result& ref) {
  if (fast.batches_used != ref.batches)
    return "batches " + std::to_string(fast.batches_used) + " vs " + std::to_string(ref.batches);
  if (fast.comparisons_used != ref.used)
    return "comparisons " + std::to_string(fast.comparisons_used) + " vs " + std::to_string(ref.used);
  if (fast.eliminations.size() != ref.eliminations.size())
    return "elimination count " + std::to_string(fast.eliminations.size()) + " vs " +
           std::to_string(ref.eliminations.size());
  // Arms eliminated in the same batch are reported in ascending order by both.
  for (std::size_t i = 0; i < ref.eliminations.size(); ++i) {
    const auto& f = fast.eliminations[i];
    if (f.batch != ref.eliminations[i].first || f.arm != ref.eliminations[i].second)
      return "elimination #" + std::to_string(i) + ": (" + std::to_string(f.batch) + "," + std::to_string(f.arm) +
             ") vs (" + std::to_string(ref.eliminations[i].first) + "," + std::to_string(ref.eliminations[i].second) + ")";
  }
  auto as_sets = [](const std::vector<std::vector<Arm>>& v) {
    std::vector<ArmSet> out;
    for (const auto& s : v) out.emplace_back(s.begin(), s.end());
    return out;
  };
  if (as_sets(fast.a_star_sets) != ref.a_stars) return "A* sets differ";
  if (as_sets(fast.seed_sets) != ref.seed_sets) return "seed sets differ";
  if (fast.candidate_history != ref.candidates) return "candidate history differs";
  if (ArmSet(fast.survivors.begin(), fast.survivors.end()) != ref.survivors) return "survivors differ";
  if (std::abs(fast.final_regret - ref.regret) > 1e-9 * (1.0 + ref.regret)) return "final regret differs";
  return {};
}

}  // namespace reference
