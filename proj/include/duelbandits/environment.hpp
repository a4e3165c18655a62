#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "duelbandits/preference.hpp"
#include "duelbandits/rng.hpp"

namespace duelbandits {

enum class Outcome { first_wins, second_wins };

struct TracePoint {
  std::int64_t t = 0;
  double regret = 0.0;
  bool operator==(const TracePoint&) const = default;
};

// Cumulative regret R(t) sampled at increasing t.
class RegretTrace {
 public:
  // Appends (t, regret) if t is past the last checkpoint; otherwise ignored.
  void record(std::int64_t t, double regret);

  const std::vector<TracePoint>& points() const noexcept { return points_; }
  bool empty() const noexcept { return points_.empty(); }
  const TracePoint& back() const { return points_.back(); }

  // R(t) at an exact checkpoint; throws std::out_of_range if t was not recorded.
  double at(std::int64_t t) const;

  // CSV with header `t,regret`, values at 17 significant digits.
  std::string to_csv() const;
  static RegretTrace from_csv(const std::string& text);

  bool operator==(const RegretTrace&) const = default;

 private:
  std::vector<TracePoint> points_;
};

struct PairRequest {
  Arm first = 0;
  Arm second = 0;
  std::int64_t count = 0;
};

struct PairResult {
  Arm first = 0;
  Arm second = 0;
  std::int64_t comparisons = 0;
  std::int64_t first_wins = 0;
};

struct BatchFeedback {
  std::vector<PairResult> results;  // same order as the schedule
  bool truncated = false;
};

// Uniform variate deciding the n-th comparison (0-based) of the unordered pair {lo, hi}, lo < hi.
// The lower-indexed arm wins iff the variate is below P(lo, hi). Outcomes therefore depend only
// on (seed, pair, n), never on the order in which pairs are scheduled.
double comparison_variate(std::uint64_t duel_seed, Arm lo, Arm hi, std::int64_t n) noexcept;

struct DuelRecord {
  std::int64_t t = 0;  // 1-based step index
  Arm first = 0;
  Arm second = 0;
  Outcome outcome = Outcome::first_wins;
};

// Stochastic duel oracle. Single owner; not thread-safe.
class Environment {
 public:
  // Throws NoCondorcetWinner. `checkpoints` sets the regular trace grid to every
  // ceil(T / checkpoints) steps.
  Environment(PreferenceMatrix matrix, std::int64_t t_budget, std::uint64_t seed, std::int64_t checkpoints = 1000);

  const PreferenceMatrix& matrix() const noexcept { return matrix_; }
  const GapVector& gaps() const noexcept { return gaps_; }
  std::size_t arms() const noexcept { return matrix_.size(); }
  std::int64_t budget() const noexcept { return t_budget_; }
  std::int64_t used() const noexcept { return t_used_; }
  std::int64_t remaining() const noexcept { return t_budget_ - t_used_; }
  bool exhausted() const noexcept { return t_used_ >= t_budget_; }
  double cumulative_regret() const noexcept { return cum_regret_; }
  const RegretTrace& trace() const noexcept { return trace_; }
  std::int64_t batches() const noexcept { return batches_; }
  std::int64_t checkpoint_step() const noexcept { return step_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t duel_seed() const noexcept { return duel_seed_; }

  // Number of duels each arm took part in; a self-duel counts twice.
  const std::vector<std::int64_t>& appearances() const noexcept { return appearances_; }

  // Randomness available to policies, independent of duel outcomes.
  Rng& policy_rng() noexcept { return policy_rng_; }

  void set_observer(std::function<void(const DuelRecord&)> observer) { observer_ = std::move(observer); }

  // One comparison. Throws BudgetExhausted when no budget remains, RangeError for bad arms.
  Outcome duel(Arm i, Arm j);

  // Executes the schedule in order and reports all outcomes together. Truncates when the
  // budget runs out. Throws DomainError on an empty schedule or non-positive counts.
  BatchFeedback execute_batch(const std::vector<PairRequest>& schedule);

 private:
  bool play(Arm i, Arm j);

  PreferenceMatrix matrix_;
  GapVector gaps_;
  std::int64_t t_budget_;
  std::int64_t t_used_ = 0;
  std::uint64_t seed_;
  std::uint64_t duel_seed_;
  Rng policy_rng_;
  std::int64_t step_;
  double cum_regret_ = 0.0;
  RegretTrace trace_;
  std::int64_t batches_ = 0;
  std::vector<std::int64_t> pair_counts_;
  std::vector<std::int64_t> appearances_;
  std::function<void(const DuelRecord&)> observer_;
};

inline Environment create_env(PreferenceMatrix m, std::int64_t t_budget, std::uint64_t seed) {
  return Environment(std::move(m), t_budget, seed);
}

}  // namespace duelbandits
