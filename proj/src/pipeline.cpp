#include "rdhp/pipeline.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "rdhp/errors.hpp"

namespace rdhp {

HawkesParams hawkes_from_json(const nlohmann::json& j) {
  try {
    return HawkesParams(j.at("mu").get<std::vector<double>>(), j.at("alpha").get<Matrix>(),
                        j.at("gamma").get<Matrix>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hawkes params: ") + e.what());
  }
}

nlohmann::json hawkes_to_json(const HawkesParams& p) {
  return {{"mu", p.mu()}, {"alpha", p.alpha()}, {"gamma", p.gamma()}};
}

HawkesParams cyclic_hawkes(std::uint32_t K) {
  std::vector<double> mu(K, 0.15);
  Matrix alpha(K, std::vector<double>(K, 0.0)), gamma(K, std::vector<double>(K, 2.0));
  for (std::uint32_t j = 0; j < K; ++j) {
    alpha[(j + 1) % K][j] = 1.4;
    alpha[j][j] = 0.2;
  }
  return HawkesParams(std::move(mu), std::move(alpha), std::move(gamma));
}

nlohmann::json SyntheticSetup::to_json() const {
  return {{"params", hawkes_to_json(params)}, {"num_sequences", num_sequences}, {"t_max", t_max}};
}

SyntheticSetup SyntheticSetup::from_json(const nlohmann::json& j) {
  SyntheticSetup s;
  if (j.contains("params")) s.params = hawkes_from_json(j.at("params"));
  s.num_sequences = j.value("num_sequences", s.num_sequences);
  s.t_max = j.value("t_max", s.t_max);
  if (s.num_sequences == 0 || !(s.t_max > 0.0)) throw ConfigError("setup needs num_sequences > 0 and t_max > 0");
  return s;
}

ExperimentData prepare_experiment(const SyntheticSetup& setup, const SplitSpec& split_spec, const NoiseSpec& noise,
                                  std::uint64_t seed, Execution exec) {
  const CounterRng root(seed, 0xE7);
  const SimulatedDataset sim = simulate_dataset(setup.params, setup.num_sequences, setup.t_max, root.derive(1).next(), exec);
  SplitSpec ss = split_spec;
  ss.seed = root.derive(2).next();
  SplitResult sp = split(sim.dataset, ss);
  ExperimentData d;
  d.clean_train = std::move(sp.train);
  d.clean = std::move(sp.clean);
  d.val = std::move(sp.val);
  d.test = std::move(sp.test);
  NoiseSpec ns = noise;
  ns.seed = root.derive(3).next();
  CorruptionResult cr = corrupt(d.clean_train, ns, exec);
  d.noisy_train = std::move(cr.noisy);
  d.log = std::move(cr.log);
  return d;
}

Dataset corrupt_train(const ExperimentData& data, const NoiseSpec& noise, Execution exec) {
  NoiseSpec ns = noise;
  ns.seed = data.log.spec.seed;
  return corrupt(data.clean_train, ns, exec).noisy;
}

TrialResult run_trial(const TrainConfig& config, const Dataset& noisy_train, const ExperimentData& data) {
  FitResult fr = fit(config, noisy_train, data.clean, data.val);
  TrialResult t;
  t.history = std::move(fr.history);
  t.best_epoch = fr.best_epoch;
  t.model = std::move(fr.best_model);
  t.test = evaluate(Predictor::from_json(t.model), data.test, config.execution());
  return t;
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double s = 0.0;
    for (double x : xs) s += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(s / static_cast<double>(xs.size() - 1));
  }
  return r;
}

SweepGrid SweepGrid::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"setup", "split", "train", "variants", "noise", "seeds"};
  if (!j.is_object()) throw ConfigError("sweep grid must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown sweep field '" + k + "'");
  SweepGrid g;
  try {
    if (j.contains("setup")) g.setup = SyntheticSetup::from_json(j.at("setup"));
    if (j.contains("split")) {
      const auto& s = j.at("split");
      g.split.train_frac = s.value("train", g.split.train_frac);
      g.split.val_frac = s.value("val", g.split.val_frac);
      g.split.test_frac = s.value("test", g.split.test_frac);
      g.split.clean_frac = s.value("clean", g.split.clean_frac);
    }
    g.split.validate();
    g.train = j.value("train", nlohmann::json::object());
    if (j.contains("variants")) {
      for (const auto& [name, over] : j.at("variants").items()) g.variants.emplace_back(name, over);
    } else {
      g.variants.emplace_back("rdhp", nlohmann::json::object());
    }
    for (const auto& n : j.at("noise")) {
      NoiseSpec ns;
      ns.kind = parse_noise_kind(n.value("kind", std::string("uniform")));
      ns.p = n.value("p", 0.0);
      ns.time_p = n.value("time_p", 0.0);
      ns.time_sigma = n.value("time_sigma", ns.time_sigma);
      ns.validate();
      g.noise.push_back(ns);
    }
    g.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sweep grid: ") + e.what());
  }
  if (g.noise.empty() || g.seeds.empty()) throw ConfigError("sweep grid needs at least one noise level and seed");
  for (const auto& [name, over] : g.variants) {
    nlohmann::json t = g.train;
    t.merge_patch(over);
    TrainConfig::from_json(t);
  }
  return g;
}

std::vector<SweepRun> sweep_runs(const SweepGrid& grid) {
  std::vector<SweepRun> runs;
  for (std::size_t v = 0; v < grid.variants.size(); ++v)
    for (std::size_t n = 0; n < grid.noise.size(); ++n)
      for (std::size_t s = 0; s < grid.seeds.size(); ++s) runs.push_back({v, n, s});
  return runs;
}

std::pair<double, double> execute_run(const SweepGrid& grid, const SweepRun& run, Execution exec) {
  const std::uint64_t seed = grid.seeds.at(run.seed);
  const ExperimentData data = prepare_experiment(grid.setup, grid.split, grid.noise.at(run.noise), seed, exec);
  nlohmann::json t = grid.train;
  t.merge_patch(grid.variants.at(run.variant).second);
  TrainConfig cfg = TrainConfig::from_json(t);
  cfg.seed = seed;
  cfg.parallel = exec == Execution::parallel;
  const TrialResult r = run_trial(cfg, data.noisy_train, data);
  return {r.test.f1, r.test.rmse};
}

std::vector<SweepCell> aggregate(const SweepGrid& grid, const std::vector<std::pair<double, double>>& results) {
  const auto runs = sweep_runs(grid);
  if (runs.size() != results.size()) throw ContractError("sweep: result count does not match the grid");
  std::vector<SweepCell> cells;
  for (std::size_t v = 0; v < grid.variants.size(); ++v)
    for (std::size_t n = 0; n < grid.noise.size(); ++n) {
      SweepCell c;
      c.variant = grid.variants[v].first;
      c.kind = grid.noise[n].kind;
      c.p = grid.noise[n].p;
      c.time_p = grid.noise[n].time_p;
      cells.push_back(c);
    }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto& c = cells[runs[i].variant * grid.noise.size() + runs[i].noise];
    c.f1.push_back(results[i].first);
    c.rmse.push_back(results[i].second);
  }
  return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream os;
  os.precision(6);
  os << "variant,noise,p,time_p,runs,f1_mean,f1_std,rmse_mean,rmse_std,flag\n";
  for (const auto& c : cells) {
    const MeanStd f = mean_std(c.f1), r = mean_std(c.rmse);
    std::string flag;
    for (const auto& o : cells)
      if (o.variant == c.variant && (o.kind == c.kind || o.p == 0.0) && o.p < c.p && mean_std(o.f1).mean < f.mean)
        flag = "degraded_f1_not_monotone";
    os << c.variant << ',' << to_string(c.kind) << ',' << c.p << ',' << c.time_p << ',' << c.f1.size() << ','
       << f.mean << ',' << f.std << ',' << r.mean << ',' << r.std << ',' << flag << '\n';
  }
  return os.str();
}

}  // namespace rdhp
