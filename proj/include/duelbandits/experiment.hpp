#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "duelbandits/baselines.hpp"
#include "duelbandits/batched.hpp"
#include "duelbandits/preference.hpp"

namespace duelbandits {

// Instance generator and its parameters. Generators: syn-btl, syn-cd, csv, lb-f, lb-e, lb-q.
struct InstanceSpec {
  std::string generator = "syn-btl";
  std::size_t k = 100;
  std::optional<double> delta;  // syn-cd: drawn from Uniform(0, 1/2) per repeat when unset
  std::optional<Arm> winner;    // syn-cd / lb-e / lb-q (l arm): drawn uniformly when unset
  std::optional<Arm> k_arm;     // lb-q
  std::filesystem::path path;   // csv
};

enum class DeltaRule { algorithm_default, experiment, fixed };

struct AlgorithmSpec {
  std::string name;   // pcomp, scomp, scomp2, rscomp, rucb, rmed1, btm
  std::string label;  // output file stem; defaults to name
  AlgoParams algo;    // `rounds` is overwritten for every B of the sweep
  // experiment: delta = 1/(T K^2); fixed: algo.delta as given.
  DeltaRule delta_rule = DeltaRule::algorithm_default;
  BaselineParams baseline;

  bool is_batched() const;
};

struct ExperimentConfig {
  InstanceSpec instance;
  std::vector<AlgorithmSpec> algorithms;
  std::int64_t t_budget = 100000;
  std::vector<int> rounds{16};
  int repeats = 10;
  std::uint64_t master_seed = 1;
  std::int64_t checkpoints = 1000;
  bool fixed_instance = false;
  bool keep_runs = false;
  unsigned workers = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Named presets: paper-compare, paper-tradeoff. Throws ConfigError for unknown names.
ExperimentConfig preset(const std::string& name);

struct SeriesResult {
  std::string label;
  std::string algorithm;
  int rounds = 0;
  std::vector<std::int64_t> t;
  std::vector<double> mean_regret;
  std::vector<double> std_regret;
  std::vector<double> final_regret;      // per repeat
  std::vector<std::int64_t> batches;     // per repeat
  std::vector<std::int64_t> comparisons; // per repeat
  std::vector<bool> winner_survived;     // per repeat
  std::vector<RegretTrace> run_traces;   // per repeat, only with keep_runs

  double mean_batches() const;
  double survival_rate() const;
  double mean_final_regret() const;
  std::string file_stem() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeriesResult> series;  // algorithm-major, then B
};

// Regular checkpoint grid shared by every run: multiples of ceil(T / checkpoints), plus T.
std::vector<std::int64_t> checkpoint_grid(std::int64_t t_budget, std::int64_t checkpoints);

// Builds the instance for one repeat from its seed stream.
PreferenceMatrix build_instance(const InstanceSpec& spec, std::uint64_t master_seed, int repeat);

std::uint64_t run_seed(std::uint64_t master_seed, int repeat);

// Runs one algorithm on a fresh environment.
RunResult run_algorithm(const AlgorithmSpec& spec, int rounds, const PreferenceMatrix& m, std::int64_t t_budget,
                        std::uint64_t seed, std::int64_t checkpoints = 1000);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// One `<stem>.csv` per series with header `t,mean_regret,std_regret`, plus summary.json.
// With keep_runs, per-run traces go to runs/<stem>_rep<i>.csv. Returns the written paths.
std::vector<std::filesystem::path> write_result_csv(const ExperimentResult& res, const std::filesystem::path& dir);

struct SeriesCsv {
  std::vector<std::int64_t> t;
  std::vector<double> mean_regret;
  std::vector<double> std_regret;
};

SeriesCsv load_series_csv(const std::filesystem::path& path);

}  // namespace duelbandits
