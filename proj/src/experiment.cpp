#include "duelbandits/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "duelbandits/errors.hpp"
#include "duelbandits/lower_bound.hpp"

namespace duelbandits {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInstanceStream = 11;
constexpr std::uint64_t kRunStream = 12;

const std::set<std::string> kBatched{"pcomp", "scomp", "scomp2", "rscomp"};
const std::set<std::string> kSequential{"rucb", "rmed1", "btm"};
const std::set<std::string> kGenerators{"syn-btl", "syn-cd", "csv", "lb-f", "lb-e", "lb-q"};

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + key, "unknown key");
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + key, e.what());
  }
}

template <typename T>
void get_opt(const json& obj, const std::string& key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

template <typename T>
void get_opt(const json& obj, const std::string& key, const std::string& where, std::optional<T>& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

InstanceSpec parse_instance(const json& j) {
  const std::string w = "instance.";
  if (!j.is_object()) throw ConfigError("instance", "must be an object");
  reject_unknown(j, w, {"generator", "k", "delta", "winner", "k_arm", "path"});
  InstanceSpec s;
  s.generator = get<std::string>(j, "generator", w);
  get_opt(j, "k", w, s.k);
  get_opt(j, "delta", w, s.delta);
  get_opt(j, "winner", w, s.winner);
  get_opt(j, "k_arm", w, s.k_arm);
  if (j.contains("path")) s.path = get<std::string>(j, "path", w);
  return s;
}

AlgorithmSpec parse_algorithm(const json& j, std::size_t index) {
  const std::string w = "algorithms[" + std::to_string(index) + "].";
  if (!j.is_object()) throw ConfigError(w.substr(0, w.size() - 1), "must be an object");
  reject_unknown(j, w,
                 {"name", "label", "elimination", "delta", "kl_threshold", "seed_prob", "q", "tau", "depth", "eta",
                  "seed_base", "alpha", "f_scale", "f_exp", "btm_gamma", "btm_scale", "btm_delta"});
  AlgorithmSpec a;
  a.name = get<std::string>(j, "name", w);
  a.label = a.name;
  get_opt(j, "label", w, a.label);
  if (j.contains("elimination")) {
    const auto e = get<std::string>(j, "elimination", w);
    if (e == "kl") a.algo.elimination = Elimination::kl;
    else if (e == "hoeffding") a.algo.elimination = Elimination::hoeffding;
    else throw ConfigError(w + "elimination", "expected 'hoeffding' or 'kl', got '" + e + "'");
  }
  if (j.contains("delta")) {
    const json& d = j.at("delta");
    if (d.is_string()) {
      const auto rule = d.get<std::string>();
      if (rule == "experiment") a.delta_rule = DeltaRule::experiment;
      else if (rule == "default") a.delta_rule = DeltaRule::algorithm_default;
      else throw ConfigError(w + "delta", "expected a number, 'experiment' or 'default'");
    } else {
      a.algo.delta = get<double>(j, "delta", w);
      a.delta_rule = DeltaRule::fixed;
    }
  }
  get_opt(j, "kl_threshold", w, a.algo.kl_threshold);
  get_opt(j, "seed_prob", w, a.algo.seed_prob);
  get_opt(j, "q", w, a.algo.q);
  get_opt(j, "tau", w, a.algo.tau);
  get_opt(j, "depth", w, a.algo.depth);
  get_opt(j, "eta", w, a.algo.eta);
  if (j.contains("seed_base")) {
    const auto b = get<std::string>(j, "seed_base", w);
    if (b == "current") a.algo.seed_base = SeedBase::current_active;
    else if (b == "original") a.algo.seed_base = SeedBase::original;
    else throw ConfigError(w + "seed_base", "expected 'current' or 'original'");
  }
  get_opt(j, "alpha", w, a.baseline.alpha);
  get_opt(j, "f_scale", w, a.baseline.f_scale);
  get_opt(j, "f_exp", w, a.baseline.f_exp);
  get_opt(j, "btm_gamma", w, a.baseline.btm_gamma);
  get_opt(j, "btm_scale", w, a.baseline.btm_scale);
  get_opt(j, "btm_delta", w, a.baseline.btm_delta);
  return a;
}

json algorithm_json(const AlgorithmSpec& a) {
  json j{{"name", a.name}, {"label", a.label}};
  if (a.is_batched()) {
    j["elimination"] = to_string(a.algo.elimination);
    if (a.delta_rule == DeltaRule::experiment) j["delta"] = "experiment";
    else if (a.delta_rule == DeltaRule::fixed && a.algo.delta) j["delta"] = *a.algo.delta;
    else j["delta"] = "default";
    if (a.algo.kl_threshold) j["kl_threshold"] = *a.algo.kl_threshold;
    if (a.algo.seed_prob) j["seed_prob"] = *a.algo.seed_prob;
    if (a.algo.q) j["q"] = *a.algo.q;
    j["tau"] = a.algo.tau;
    if (a.name == "rscomp") {
      j["depth"] = a.algo.depth;
      j["eta"] = a.algo.eta;
      j["seed_base"] = a.algo.seed_base == SeedBase::original ? "original" : "current";
    }
  } else if (a.name == "rucb") {
    j["alpha"] = a.baseline.alpha;
  } else if (a.name == "rmed1") {
    j["f_scale"] = a.baseline.f_scale;
    j["f_exp"] = a.baseline.f_exp;
  } else if (a.name == "btm") {
    j["btm_gamma"] = a.baseline.btm_gamma;
    if (a.baseline.btm_scale) j["btm_scale"] = *a.baseline.btm_scale;
    if (a.baseline.btm_delta) j["btm_delta"] = *a.baseline.btm_delta;
  }
  return j;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

bool AlgorithmSpec::is_batched() const { return kBatched.count(name) > 0; }

void ExperimentConfig::validate() const {
  if (!kGenerators.count(instance.generator)) {
    throw ConfigError("instance.generator", "unknown generator '" + instance.generator + "'");
  }
  if (instance.generator == "csv") {
    if (instance.path.empty()) throw ConfigError("instance.path", "required for the csv generator");
  } else if (instance.k < 2) {
    throw ConfigError("instance.k", "must be >= 2");
  }
  if (instance.winner && instance.generator != "csv" && *instance.winner >= instance.k) {
    throw ConfigError("instance.winner", "out of range");
  }
  if (instance.generator == "syn-cd" && instance.delta && !(*instance.delta > 0.0 && *instance.delta < 0.5)) {
    throw ConfigError("instance.delta", "must lie in (0, 0.5)");
  }
  if ((instance.generator == "lb-e" || instance.generator == "lb-q") && !instance.delta) {
    throw ConfigError("instance.delta", "required for " + instance.generator);
  }
  if (instance.generator == "lb-q" && !instance.k_arm) throw ConfigError("instance.k_arm", "required for lb-q");
  if (algorithms.empty()) throw ConfigError("algorithms", "must list at least one algorithm");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    const auto& a = algorithms[i];
    const std::string w = "algorithms[" + std::to_string(i) + "]";
    if (!kBatched.count(a.name) && !kSequential.count(a.name)) {
      throw ConfigError(w + ".name", "unknown algorithm '" + a.name + "'");
    }
    if (a.label.empty()) throw ConfigError(w + ".label", "must be non-empty");
    if (!labels.insert(a.label).second) throw ConfigError(w + ".label", "duplicate label '" + a.label + "'");
    try {
      AlgoParams p = a.algo;
      p.rounds = 1;
      p.validate();
      a.baseline.validate();
    } catch (const DomainError& e) {
      throw ConfigError(w, e.what());
    }
  }
  if (t_budget < 1) throw ConfigError("t_budget", "must be >= 1");
  if (rounds.empty()) throw ConfigError("rounds", "must list at least one B");
  for (int b : rounds) {
    if (b < 1) throw ConfigError("rounds", "every B must be >= 1");
  }
  if (repeats < 1) throw ConfigError("repeats", "must be >= 1");
  if (checkpoints < 1) throw ConfigError("checkpoints", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  reject_unknown(j, "", {"instance", "algorithms", "t_budget", "rounds", "repeats", "master_seed", "checkpoints",
                         "fixed_instance", "keep_runs", "workers", "preset"});
  ExperimentConfig cfg;
  if (j.contains("preset")) cfg = preset(get<std::string>(j, "preset", ""));
  if (j.contains("instance")) cfg.instance = parse_instance(j.at("instance"));
  if (j.contains("algorithms")) {
    const json& algos = j.at("algorithms");
    if (!algos.is_array()) throw ConfigError("algorithms", "must be an array");
    cfg.algorithms.clear();
    for (std::size_t i = 0; i < algos.size(); ++i) cfg.algorithms.push_back(parse_algorithm(algos[i], i));
  }
  get_opt(j, "t_budget", "", cfg.t_budget);
  if (j.contains("rounds")) {
    const json& r = j.at("rounds");
    if (r.is_number_integer()) cfg.rounds = {r.get<int>()};
    else cfg.rounds = get<std::vector<int>>(j, "rounds", "");
  }
  get_opt(j, "repeats", "", cfg.repeats);
  get_opt(j, "master_seed", "", cfg.master_seed);
  get_opt(j, "checkpoints", "", cfg.checkpoints);
  get_opt(j, "fixed_instance", "", cfg.fixed_instance);
  get_opt(j, "keep_runs", "", cfg.keep_runs);
  get_opt(j, "workers", "", cfg.workers);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", e.what());
  }
  ExperimentConfig cfg = parse_config(j);
  if (cfg.instance.generator == "csv" && cfg.instance.path.is_relative()) {
    cfg.instance.path = path.parent_path() / cfg.instance.path;
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json inst{{"generator", cfg.instance.generator}};
  if (cfg.instance.generator == "csv") {
    inst["path"] = cfg.instance.path.string();
  } else {
    inst["k"] = cfg.instance.k;
  }
  if (cfg.instance.delta) inst["delta"] = *cfg.instance.delta;
  if (cfg.instance.winner) inst["winner"] = *cfg.instance.winner;
  if (cfg.instance.k_arm) inst["k_arm"] = *cfg.instance.k_arm;
  json algos = json::array();
  for (const auto& a : cfg.algorithms) algos.push_back(algorithm_json(a));
  return json{{"instance", inst},          {"algorithms", algos},
              {"t_budget", cfg.t_budget},  {"rounds", cfg.rounds},
              {"repeats", cfg.repeats},    {"master_seed", cfg.master_seed},
              {"checkpoints", cfg.checkpoints}, {"fixed_instance", cfg.fixed_instance}};
}

ExperimentConfig preset(const std::string& name) {
  auto batched = [](const std::string& n) {
    AlgorithmSpec a;
    a.name = a.label = n;
    a.algo.elimination = Elimination::kl;
    a.delta_rule = DeltaRule::experiment;
    return a;
  };
  auto sequential = [](const std::string& n) {
    AlgorithmSpec a;
    a.name = a.label = n;
    return a;
  };
  ExperimentConfig cfg;
  cfg.instance.generator = "syn-btl";
  cfg.instance.k = 100;
  cfg.t_budget = 100000;
  cfg.repeats = 10;
  if (name == "paper-compare") {
    cfg.rounds = {16};
    cfg.algorithms = {batched("pcomp"), batched("scomp"), batched("scomp2"),
                      sequential("rucb"), sequential("rmed1"), sequential("btm")};
  } else if (name == "paper-tradeoff") {
    cfg.rounds = {2, 8, 16};
    cfg.algorithms = {batched("scomp2"), sequential("rmed1")};
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "' (expected paper-compare or paper-tradeoff)");
  }
  return cfg;
}

double SeriesResult::mean_batches() const {
  std::vector<double> v(batches.begin(), batches.end());
  return mean_of(v);
}

double SeriesResult::survival_rate() const {
  if (winner_survived.empty()) return 0.0;
  return static_cast<double>(std::count(winner_survived.begin(), winner_survived.end(), true)) /
         static_cast<double>(winner_survived.size());
}

double SeriesResult::mean_final_regret() const { return mean_of(final_regret); }

std::string SeriesResult::file_stem() const { return label + "_B" + std::to_string(rounds); }

std::vector<std::int64_t> checkpoint_grid(std::int64_t t_budget, std::int64_t checkpoints) {
  const std::int64_t step = (t_budget + checkpoints - 1) / checkpoints;
  std::vector<std::int64_t> grid;
  for (std::int64_t t = step; t <= t_budget; t += step) grid.push_back(t);
  if (grid.empty() || grid.back() != t_budget) grid.push_back(t_budget);
  return grid;
}

PreferenceMatrix build_instance(const InstanceSpec& spec, std::uint64_t master_seed, int repeat) {
  if (spec.generator == "csv") return load_matrix_csv(spec.path);
  Rng rng(derive_seed(master_seed, {static_cast<std::uint64_t>(repeat), kInstanceStream}));
  if (spec.generator == "syn-btl") return generate_btl(spec.k, rng);
  if (spec.generator == "lb-f") return instance_F(spec.k);
  auto pick_winner = [&] { return spec.winner ? *spec.winner : static_cast<Arm>(rng.below(spec.k)); };
  if (spec.generator == "syn-cd") {
    double delta = 0.0;
    if (spec.delta) {
      delta = *spec.delta;
    } else {
      while (!(delta > 0.0)) delta = 0.5 * rng.uniform();
    }
    return generate_condorcet_hard(spec.k, delta, pick_winner());
  }
  if (spec.generator == "lb-e") return instance_E(spec.k, pick_winner(), spec.delta.value());
  if (spec.generator == "lb-q") return instance_Q(spec.k, spec.k_arm.value(), pick_winner(), spec.delta.value());
  throw ConfigError("instance.generator", "unknown generator '" + spec.generator + "'");
}

std::uint64_t run_seed(std::uint64_t master_seed, int repeat) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(repeat), kRunStream});
}

RunResult run_algorithm(const AlgorithmSpec& spec, int rounds, const PreferenceMatrix& m, std::int64_t t_budget,
                        std::uint64_t seed, std::int64_t checkpoints) {
  Environment env(m, t_budget, seed, checkpoints);
  if (spec.name == "rucb") return run_rucb(env, spec.baseline);
  if (spec.name == "rmed1") return run_rmed1(env, spec.baseline);
  if (spec.name == "btm") return run_btm(env, spec.baseline);
  AlgoParams p = spec.algo;
  p.rounds = rounds;
  if (spec.delta_rule == DeltaRule::experiment) {
    const double k = static_cast<double>(m.size());
    p.delta = 1.0 / (static_cast<double>(t_budget) * k * k);
  } else if (spec.delta_rule == DeltaRule::algorithm_default) {
    p.delta.reset();
  }
  if (spec.name == "pcomp") return run_pcomp(env, p);
  if (spec.name == "scomp") return run_scomp(env, p);
  if (spec.name == "scomp2") return run_scomp2(env, p);
  if (spec.name == "rscomp") return run_rscomp(env, p);
  throw ConfigError("algorithms.name", "unknown algorithm '" + spec.name + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  const auto grid = checkpoint_grid(cfg.t_budget, cfg.checkpoints);
  const std::size_t reps = static_cast<std::size_t>(cfg.repeats);

  std::vector<PreferenceMatrix> instances;
  instances.reserve(reps);
  for (int r = 0; r < cfg.repeats; ++r) {
    const int stream = cfg.fixed_instance ? 0 : r;
    if (cfg.fixed_instance && r > 0) instances.push_back(instances.front());
    else instances.push_back(build_instance(cfg.instance, cfg.master_seed, stream));
  }

  for (const auto& a : cfg.algorithms) {
    for (int b : cfg.rounds) {
      SeriesResult s;
      s.label = a.label;
      s.algorithm = a.name;
      s.rounds = b;
      res.series.push_back(std::move(s));
    }
  }

  // Tasks are (series, repeat) pairs; results land in fixed slots so the reduction is order-independent.
  const std::size_t n_tasks = res.series.size() * reps;
  std::vector<RunResult> runs(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      const std::size_t si = task / reps, rep = task % reps;
      const AlgorithmSpec& spec = cfg.algorithms[si / cfg.rounds.size()];
      runs[task] = run_algorithm(spec, res.series[si].rounds, instances[rep], cfg.t_budget,
                                 run_seed(cfg.master_seed, static_cast<int>(rep)), cfg.checkpoints);
    }
  };
  const unsigned n_workers = std::min<unsigned>(cfg.workers, static_cast<unsigned>(std::max<std::size_t>(1, n_tasks)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t si = 0; si < res.series.size(); ++si) {
    SeriesResult& s = res.series[si];
    s.t = grid;
    s.mean_regret.assign(grid.size(), 0.0);
    s.std_regret.assign(grid.size(), 0.0);
    std::vector<std::vector<double>> values(grid.size());
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const RunResult& run = runs[si * reps + rep];
      for (std::size_t g = 0; g < grid.size(); ++g) values[g].push_back(run.trace.at(grid[g]));
      s.final_regret.push_back(run.final_regret);
      s.batches.push_back(run.batches_used);
      s.comparisons.push_back(run.comparisons_used);
      const Arm winner = gaps(instances[rep]).winner;
      s.winner_survived.push_back(std::find(run.survivors.begin(), run.survivors.end(), winner) !=
                                  run.survivors.end());
      if (cfg.keep_runs) s.run_traces.push_back(run.trace);
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double mu = mean_of(values[g]);
      double var = 0.0;
      for (double x : values[g]) var += (x - mu) * (x - mu);
      s.mean_regret[g] = mu;
      s.std_regret[g] = std::sqrt(var / static_cast<double>(values[g].size()));
    }
  }
  return res;
}

std::vector<std::filesystem::path> write_result_csv(const ExperimentResult& res, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  json series = json::array();
  for (const auto& s : res.series) {
    std::string text = "t,mean_regret,std_regret\n";
    for (std::size_t g = 0; g < s.t.size(); ++g) {
      text += std::to_string(s.t[g]) + "," + fmt17(s.mean_regret[g]) + "," + fmt17(s.std_regret[g]) + "\n";
    }
    const auto path = dir / (s.file_stem() + ".csv");
    write_text(path, text);
    written.push_back(path);

    if (!s.run_traces.empty()) {
      std::filesystem::create_directories(dir / "runs", ec);
      if (ec) throw IoError("cannot create " + (dir / "runs").string());
      for (std::size_t r = 0; r < s.run_traces.size(); ++r) {
        const auto run_path = dir / "runs" / (s.file_stem() + "_rep" + std::to_string(r) + ".csv");
        write_text(run_path, s.run_traces[r].to_csv());
        written.push_back(run_path);
      }
    }

    std::vector<double> final_sorted = s.final_regret;
    const double mu = s.mean_final_regret();
    double var = 0.0;
    for (double x : final_sorted) var += (x - mu) * (x - mu);
    series.push_back({{"label", s.label},
                      {"algorithm", s.algorithm},
                      {"rounds", s.rounds},
                      {"csv", s.file_stem() + ".csv"},
                      {"mean_batches", s.mean_batches()},
                      {"batches", s.batches},
                      {"comparisons", s.comparisons},
                      {"winner_survival_rate", s.survival_rate()},
                      {"mean_final_regret", mu},
                      {"std_final_regret", std::sqrt(var / static_cast<double>(std::max<std::size_t>(1, final_sorted.size())))}});
  }
  json summary{{"config", to_json(res.config)}, {"series", series}};
  const auto summary_path = dir / "summary.json";
  write_text(summary_path, summary.dump(2) + "\n");
  written.push_back(summary_path);
  return written;
}

SeriesCsv load_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,mean_regret,std_regret") {
    throw ParseError(path.string() + ": expected header t,mean_regret,std_regret");
  }
  SeriesCsv out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw ParseError(path.string() + ": malformed row '" + line + "'");
    }
    try {
      out.t.push_back(std::stoll(a));
      out.mean_regret.push_back(std::stod(b));
      out.std_regret.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": malformed row '" + line + "'");
    }
  }
  return out;
}

}  // namespace duelbandits
