// duelsim: generate instances, check their structure, and run regret experiments.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "duelbandits/errors.hpp"
#include "duelbandits/experiment.hpp"
#include "duelbandits/lower_bound.hpp"
#include "duelbandits/preference.hpp"

namespace db = duelbandits;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  bool keep_runs = false;
  std::optional<unsigned> workers;
  bool fixed_instance = false;
  std::optional<std::string> dataset;
  std::optional<std::size_t> k;
  std::optional<std::int64_t> t_budget;
  std::optional<int> repeats;
  std::vector<int> rounds;
  std::optional<std::int64_t> checkpoints;
};

void add_experiment_flags(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* cfg = cmd->add_option("--config", o.config, "JSON experiment config");
  if (config_required) cfg->required();
  cmd->add_option("--preset", o.preset, "named preset (paper-compare, paper-tradeoff)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_flag("--keep-runs", o.keep_runs, "also write per-run regret traces");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_flag("--fixed-instance", o.fixed_instance, "reuse the repeat-0 instance for every repeat");
  cmd->add_option("--dataset", o.dataset, "instance generator (syn-btl, syn-cd, lb-f, ...)");
  cmd->add_option("--k", o.k, "number of arms");
  cmd->add_option("--t-budget", o.t_budget, "horizon T");
  cmd->add_option("--repeats", o.repeats, "independent repeats");
  cmd->add_option("--rounds", o.rounds, "batch budgets B, e.g. 2,8,16")->delimiter(',');
  cmd->add_option("--checkpoints", o.checkpoints, "checkpoint grid density");
}

db::ExperimentConfig resolve(const Overrides& o, const std::string& fallback_preset) {
  db::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = db::load_config(o.config);
    if (!o.preset.empty()) throw db::ConfigError("preset", "give either --config or --preset, not both");
  } else {
    cfg = db::preset(o.preset.empty() ? fallback_preset : o.preset);
  }
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.keep_runs) cfg.keep_runs = true;
  if (o.workers) cfg.workers = *o.workers;
  if (o.fixed_instance) cfg.fixed_instance = true;
  if (o.dataset) cfg.instance.generator = *o.dataset;
  if (o.k) cfg.instance.k = *o.k;
  if (o.t_budget) cfg.t_budget = *o.t_budget;
  if (o.repeats) cfg.repeats = *o.repeats;
  if (!o.rounds.empty()) cfg.rounds = o.rounds;
  if (o.checkpoints) cfg.checkpoints = *o.checkpoints;
  cfg.validate();
  return cfg;
}

int run_and_report(const db::ExperimentConfig& cfg, const std::string& out) {
  const auto res = db::run_experiment(cfg);
  const auto files = db::write_result_csv(res, out);
  std::printf("%-14s %4s %14s %12s %10s %9s\n", "series", "B", "final_regret", "std", "batches", "survival");
  for (const auto& s : res.series) {
    const double final_std = s.std_regret.empty() ? 0.0 : s.std_regret.back();
    std::printf("%-14s %4d %14.2f %12.2f %10.2f %9.2f\n", s.label.c_str(), s.rounds, s.mean_final_regret(),
                final_std, s.mean_batches(), s.survival_rate());
  }
  std::printf("wrote %zu files to %s\n", files.size(), out.c_str());
  return 0;
}

int cmd_check(const std::string& path) {
  const auto m = db::load_matrix_csv(path);
  std::printf("arms: %zu\n", m.size());
  if (const auto w = db::find_condorcet_winner(m)) {
    const auto g = db::gaps(m);
    std::printf("condorcet winner: %zu\n", *w);
    if (g.eps_min) std::printf("min gap: %.6g\n", *g.eps_min);
    else std::printf("min gap: none (all gaps zero)\n");
  } else {
    std::printf("condorcet winner: none\n");
  }
  const auto rep = db::check_structure(m);
  std::printf("total order: %s\n", rep.total_order ? "yes" : "no");
  std::printf("SST: %s\n", rep.sst ? "yes" : "no");
  std::printf("STI: %s\n", rep.sti ? "yes" : "no");
  if (!rep.diagnostic.empty()) std::printf("diagnostic: %s\n", rep.diagnostic.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched dueling-bandit simulator"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "emit an instance CSV");
  db::InstanceSpec gspec;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--dataset,--generator", gspec.generator, "syn-btl, syn-cd, lb-f, lb-e, lb-q")
      ->capture_default_str();
  gen->add_option("--k", gspec.k, "number of arms")->capture_default_str();
  gen->add_option("--delta", gspec.delta, "gap for syn-cd / lb-e / lb-q");
  gen->add_option("--winner", gspec.winner, "winner arm (lb-q: the l arm)");
  gen->add_option("--k-arm", gspec.k_arm, "lb-q: the k arm");
  gen->add_option("--seed", gen_seed, "seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output file (stdout when omitted)");

  // delta schedule for the lower-bound family
  auto* sched = app.add_subcommand("schedule", "print the lower-bound gap schedule");
  std::size_t sk = 4;
  int sb = 2;
  std::int64_t st = 16;
  bool positive = false;
  sched->add_option("--k", sk)->capture_default_str();
  sched->add_option("--rounds", sb)->capture_default_str();
  sched->add_option("--t-budget", st)->capture_default_str();
  sched->add_flag("--positive-exponent", positive, "use T^{+(j-1)/2B}");

  auto* check = app.add_subcommand("check", "report Condorcet winner, SST and STI of an instance CSV");
  std::string check_path;
  check->add_option("matrix", check_path, "instance CSV")->required();

  Overrides run_o, cmp_o, trade_o;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  add_experiment_flags(run, run_o, true);
  auto* compare = app.add_subcommand("compare", "regret vs t for an algorithm set (default preset paper-compare)");
  add_experiment_flags(compare, cmp_o, false);
  auto* tradeoff = app.add_subcommand("tradeoff", "regret vs B sweep (default preset paper-tradeoff)");
  add_experiment_flags(tradeoff, trade_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      if (gspec.generator == "csv") throw db::ConfigError("dataset", "gen cannot read a csv instance");
      db::ExperimentConfig probe;
      probe.instance = gspec;
      probe.algorithms.push_back({});
      probe.algorithms.back().name = probe.algorithms.back().label = "pcomp";
      probe.validate();
      const auto m = db::build_instance(gspec, gen_seed, 0);
      if (gen_out.empty()) std::cout << db::format_matrix_csv(m);
      else db::write_matrix_csv(m, gen_out);
      return 0;
    }
    if (*sched) {
      const auto s = db::delta_schedule(sk, sb, st, positive ? db::DeltaExponent::positive : db::DeltaExponent::negative);
      for (std::size_t j = 0; j < s.deltas.size(); ++j) std::printf("%zu,%.17g\n", j + 1, s.deltas[j]);
      return 0;
    }
    if (*check) return cmd_check(check_path);
    if (*run) return run_and_report(resolve(run_o, ""), run_o.out);
    if (*compare) return run_and_report(resolve(cmp_o, "paper-compare"), cmp_o.out);
    if (*tradeoff) return run_and_report(resolve(trade_o, "paper-tradeoff"), trade_o.out);
  } catch (const db::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
