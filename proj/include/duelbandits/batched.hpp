#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duelbandits/environment.hpp"
#include "duelbandits/preference.hpp"
#include "duelbandits/rng.hpp"

namespace duelbandits {

enum class Elimination { hoeffding, kl };

// Which arm count the recursive algorithm plugs into its seed probability 1/K^(1-eta).
enum class SeedBase { current_active, original };

struct AlgoParams {
  int rounds = 16;                    // B
  std::optional<double> q;            // default T^(1/B)
  int tau = 1;                        // starting round offset
  std::optional<double> delta;        // default depends on the algorithm
  Elimination elimination = Elimination::hoeffding;
  std::optional<double> kl_threshold; // default ln(1/delta)
  std::optional<double> seed_prob;    // default K^(-1/2); ignored by run_rscomp
  int depth = 0;                      // m, recursion depth of run_rscomp
  double eta = 0.5;
  SeedBase seed_base = SeedBase::current_active;
  // Replaces the sampled seed set of the first phase (tests and diagnostics).
  std::optional<std::vector<Arm>> forced_seed_set;

  // Throws DomainError when an invariant is broken.
  void validate() const;
};

struct EliminationEvent {
  std::int64_t batch = 0;  // 1-based batch index in which the arm left the active set
  Arm arm = 0;
  bool operator==(const EliminationEvent&) const = default;
};

struct RunResult {
  RegretTrace trace;
  std::int64_t batches_used = 0;
  std::int64_t comparisons_used = 0;
  double final_regret = 0.0;
  std::vector<Arm> survivors;
  // First round at which a seeded phase handed off; every hand-off is in switch_rounds.
  std::optional<int> switch_round;
  std::vector<int> switch_rounds;
  std::vector<std::vector<Arm>> a_star_sets;
  std::vector<std::vector<Arm>> seed_sets;
  std::vector<Arm> candidate_history;
  std::vector<EliminationEvent> eliminations;
};

// Per-batch and cumulative comparison statistics for every pair.
class PairEstimates {
 public:
  explicit PairEstimates(std::size_t k) : k_(k), round_n_(k * k), round_w_(k * k), total_n_(k * k), total_w_(k * k) {}

  void begin_round();
  void add(Arm i, Arm j, std::int64_t comparisons, std::int64_t i_wins);

  std::int64_t round_count(Arm i, Arm j) const noexcept { return round_n_[i * k_ + j]; }
  std::int64_t total_count(Arm i, Arm j) const noexcept { return total_n_[i * k_ + j]; }
  // Fresh estimate from the current batch; requires round_count(i, j) > 0.
  double round_p(Arm i, Arm j) const noexcept {
    return static_cast<double>(round_w_[i * k_ + j]) / static_cast<double>(round_n_[i * k_ + j]);
  }
  // Estimate pooled over every batch so far; requires total_count(i, j) > 0.
  double total_p(Arm i, Arm j) const noexcept {
    return static_cast<double>(total_w_[i * k_ + j]) / static_cast<double>(total_n_[i * k_ + j]);
  }
  std::size_t size() const noexcept { return k_; }

 private:
  std::size_t k_;
  std::vector<std::int64_t> round_n_, round_w_, total_n_, total_w_;
};

struct RoundRule {
  Elimination elimination = Elimination::hoeffding;
  double gamma = 0.0;
  double multiplier = 1.0;
  double kl_threshold = 0.0;
};

// max(1, floor(q^(r + tau - 1))).
std::int64_t compute_cr(double q, int r, int tau);

// sqrt(ln(1/delta) / (2 cr)).
double compute_gamma(double delta, std::int64_t cr);

// Bernoulli KL divergence d(p || q), with 0 ln 0 = 0. Throws DomainError unless q in (0, 1).
double binary_kl(double p, double q);

// Whether arm i knocks out arm j. Hoeffding: fresh estimate P(i,j) > 1/2 + multiplier * gamma.
// KL: pooled estimate P(j,i) < 1/2 and N(j,i) * d(P(j,i) || 1/2) > kl_threshold.
bool eliminates(const PairEstimates& est, Arm i, Arm j, const RoundRule& rule);

// Independent Bernoulli(prob) inclusion of each listed arm, redrawn until non-empty.
std::vector<Arm> sample_seed_set(std::span<const Arm> arms, double prob, Rng& rng);
std::vector<Arm> sample_seed_set(std::size_t k, double prob, Rng& rng);

double default_delta_pcomp(std::int64_t t, std::size_t k, int rounds);
double default_delta_rscomp(std::int64_t t, std::size_t k, int rounds, int depth);

// All-pairs elimination over `active` (all arms when empty).
RunResult run_pcomp(Environment& env, const AlgoParams& params, std::vector<Arm> active = {});
RunResult run_scomp(Environment& env, const AlgoParams& params);
RunResult run_scomp2(Environment& env, const AlgoParams& params);
RunResult run_rscomp(Environment& env, const AlgoParams& params);

std::string to_string(Elimination e);

}  // namespace duelbandits
