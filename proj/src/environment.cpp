#include "duelbandits/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "duelbandits/errors.hpp"

namespace duelbandits {

namespace {
constexpr std::uint64_t kDuelStream = 1;
constexpr std::uint64_t kPolicyStream = 2;
}  // namespace

void RegretTrace::record(std::int64_t t, double regret) {
  if (!points_.empty() && points_.back().t >= t) return;
  points_.push_back({t, regret});
}

double RegretTrace::at(std::int64_t t) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), t,
                             [](const TracePoint& p, std::int64_t v) { return p.t < v; });
  if (it == points_.end() || it->t != t) throw std::out_of_range("no checkpoint at t=" + std::to_string(t));
  return it->regret;
}

std::string RegretTrace::to_csv() const {
  std::string out = "t,regret\n";
  char line[64];
  for (const auto& p : points_) {
    std::snprintf(line, sizeof line, "%lld,%.17g\n", static_cast<long long>(p.t), p.regret);
    out += line;
  }
  return out;
}

RegretTrace RegretTrace::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,regret", 0) != 0) throw ParseError("trace CSV must start with t,regret");
  RegretTrace trace;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("malformed trace row: " + line);
    TracePoint p;
    auto r1 = std::from_chars(line.data(), line.data() + comma, p.t);
    auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), p.regret);
    if (r1.ec != std::errc() || r2.ec != std::errc()) throw ParseError("malformed trace row: " + line);
    trace.points_.push_back(p);
  }
  return trace;
}

double comparison_variate(std::uint64_t duel_seed, Arm lo, Arm hi, std::int64_t n) noexcept {
  return to_unit(derive_seed(duel_seed, {static_cast<std::uint64_t>(lo), static_cast<std::uint64_t>(hi),
                                         static_cast<std::uint64_t>(n)}));
}

Environment::Environment(PreferenceMatrix matrix, std::int64_t t_budget, std::uint64_t seed, std::int64_t checkpoints)
    : matrix_(std::move(matrix)),
      gaps_(duelbandits::gaps(matrix_)),
      t_budget_(t_budget),
      seed_(seed),
      duel_seed_(derive_seed(seed, {kDuelStream})),
      policy_rng_(derive_seed(seed, {kPolicyStream})),
      pair_counts_(matrix_.size() * matrix_.size(), 0),
      appearances_(matrix_.size(), 0) {
  if (t_budget < 1) throw DomainError("time budget must be positive");
  if (checkpoints < 1) throw DomainError("checkpoint count must be positive");
  step_ = (t_budget + checkpoints - 1) / checkpoints;
}

bool Environment::play(Arm i, Arm j) {
  ++t_used_;
  cum_regret_ += 0.5 * (gaps_.eps[i] + gaps_.eps[j]);
  ++appearances_[i];
  ++appearances_[j];
  bool first_wins = true;
  if (i != j) {
    const Arm lo = std::min(i, j), hi = std::max(i, j);
    std::int64_t& n = pair_counts_[lo * matrix_.size() + hi];
    const bool lo_wins = comparison_variate(duel_seed_, lo, hi, n) < matrix_(lo, hi);
    ++n;
    first_wins = (lo_wins == (i == lo));
  }
  if (t_used_ % step_ == 0 || t_used_ == t_budget_) trace_.record(t_used_, cum_regret_);
  if (observer_) observer_({t_used_, i, j, first_wins ? Outcome::first_wins : Outcome::second_wins});
  return first_wins;
}

Outcome Environment::duel(Arm i, Arm j) {
  if (exhausted()) throw BudgetExhausted("time budget of " + std::to_string(t_budget_) + " exhausted");
  if (i >= arms() || j >= arms()) throw RangeError("arm index out of range");
  return play(i, j) ? Outcome::first_wins : Outcome::second_wins;
}

BatchFeedback Environment::execute_batch(const std::vector<PairRequest>& schedule) {
  if (schedule.empty()) throw DomainError("empty batch schedule");
  for (const auto& req : schedule) {
    if (req.count < 1) throw DomainError("batch counts must be >= 1");
    if (req.first >= arms() || req.second >= arms()) throw RangeError("arm index out of range");
  }
  BatchFeedback fb;
  fb.results.reserve(schedule.size());
  std::int64_t performed = 0;
  for (const auto& req : schedule) {
    PairResult res{req.first, req.second, 0, 0};
    const std::int64_t n = std::min(req.count, remaining());
    for (std::int64_t c = 0; c < n; ++c) res.first_wins += play(req.first, req.second) ? 1 : 0;
    res.comparisons = n;
    performed += n;
    if (n < req.count) fb.truncated = true;
    fb.results.push_back(res);
  }
  if (performed > 0) {
    ++batches_;
    trace_.record(t_used_, cum_regret_);
  }
  return fb;
}

}  // namespace duelbandits
