#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duelbandits/rng.hpp"

namespace duelbandits {

using Arm = std::size_t;

// Absolute tolerance for structural checks on matrices.
inline constexpr double kStructureTolerance = 1e-9;

// K x K matrix of pairwise win probabilities; entry (i, j) is the probability
// that arm i beats arm j. Immutable once constructed.
class PreferenceMatrix {
 public:
  // Validates and builds a matrix. The diagonal is coerced to exactly 1/2.
  // Throws DimensionError, RangeError or ComplementViolation.
  static PreferenceMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static PreferenceMatrix from_flat(std::size_t k, std::vector<double> row_major);

  std::size_t size() const noexcept { return k_; }
  double operator()(Arm i, Arm j) const noexcept { return p_[i * k_ + j]; }
  std::span<const double> row(Arm i) const noexcept { return {p_.data() + i * k_, k_}; }
  const std::vector<double>& data() const noexcept { return p_; }

  bool operator==(const PreferenceMatrix&) const = default;

 private:
  PreferenceMatrix(std::size_t k, std::vector<double> p) : k_(k), p_(std::move(p)) {}

  std::size_t k_;
  std::vector<double> p_;
};

// Gaps of every arm relative to the Condorcet winner.
struct GapVector {
  Arm winner = 0;
  std::vector<double> eps;
  // Smallest strictly positive gap; empty when all gaps are zero.
  std::optional<double> eps_min;
};

// P(i, j) = w_i / (w_i + w_j).
PreferenceMatrix btl_from_weights(std::span<const double> weights);

// BTL matrix with weights drawn once from Uniform(0, 1].
PreferenceMatrix generate_btl(std::size_t k, Rng& rng);

// Winner beats every other arm with probability 1/2 + delta; all other pairs are even.
PreferenceMatrix generate_condorcet_hard(std::size_t k, double delta, Arm winner);

PreferenceMatrix load_matrix_csv(const std::filesystem::path& path);
PreferenceMatrix parse_matrix_csv(const std::string& text);
std::string format_matrix_csv(const PreferenceMatrix& m);
void write_matrix_csv(const PreferenceMatrix& m, const std::filesystem::path& path);

// Smallest index i with P(i, j) >= 1/2 for every j != i.
std::optional<Arm> find_condorcet_winner(const PreferenceMatrix& m);

// Throws NoCondorcetWinner when the matrix has none.
GapVector gaps(const PreferenceMatrix& m);

struct StructureReport {
  // Candidate total order: descending row sum, ties by index.
  std::vector<Arm> order;
  bool total_order = false;
  bool sst = false;
  bool sti = false;
  std::string diagnostic;
};

StructureReport check_structure(const PreferenceMatrix& m);
bool check_sst(const PreferenceMatrix& m);
bool check_sti(const PreferenceMatrix& m);

}  // namespace duelbandits
