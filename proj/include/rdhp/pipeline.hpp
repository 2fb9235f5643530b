#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdhp/hawkes_sim.hpp"
#include "rdhp/noise_forge.hpp"
#include "rdhp/tpp_core.hpp"
#include "rdhp/trainer.hpp"

namespace rdhp {

/// {"mu": [...], "alpha": [[...]], "gamma": [[...]]}
HawkesParams hawkes_from_json(const nlohmann::json& j);
nlohmann::json hawkes_to_json(const HawkesParams& p);

/// Four-type process used by the synthetic experiments: each type mostly
/// triggers the next one in a cycle, plus weak self-excitation.
HawkesParams cyclic_hawkes(std::uint32_t num_types = 4);

struct SyntheticSetup {
  HawkesParams params = cyclic_hawkes();
  std::size_t num_sequences = 2000;
  double t_max = 12.0;

  nlohmann::json to_json() const;
  static SyntheticSetup from_json(const nlohmann::json& j);
};

/// Simulated data after split and train-split corruption.
struct ExperimentData {
  Dataset clean_train;  // train split before corruption
  Dataset noisy_train;
  Dataset clean;  // clean subset for the reweight net
  Dataset val;
  Dataset test;
  CorruptionLog log;
};

/// One trial: simulation, split and corruption all draw from streams of seed.
ExperimentData prepare_experiment(const SyntheticSetup& setup, const SplitSpec& split_spec, const NoiseSpec& noise,
                                  std::uint64_t seed, Execution exec = Execution::parallel);

/// Re-corrupts an existing split (same seed family) with another noise spec.
Dataset corrupt_train(const ExperimentData& data, const NoiseSpec& noise, Execution exec = Execution::parallel);

struct TrialResult {
  EvalResult test;
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  nlohmann::json model;  // kept checkpoint, model.json layout
};

/// fit() on the noisy train split, then evaluation of the kept model on test.
TrialResult run_trial(const TrainConfig& config, const Dataset& noisy_train, const ExperimentData& data);

struct SweepCell {
  std::string variant;
  NoiseKind kind = NoiseKind::none;
  double p = 0.0;
  double time_p = 0.0;
  std::vector<double> f1;
  std::vector<double> rmse;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
/// Sample standard deviation (0 for a single value).
MeanStd mean_std(const std::vector<double>& xs);

/// Sweep grid: {"setup": {...}, "split": {...}, "train": {...},
/// "variants": {name: {train overrides}}, "noise": [{"kind", "p", "time_p"}],
/// "seeds": [...]}. Unknown top-level keys are rejected.
struct SweepGrid {
  SyntheticSetup setup;
  SplitSpec split;
  nlohmann::json train;
  std::vector<std::pair<std::string, nlohmann::json>> variants;
  std::vector<NoiseSpec> noise;
  std::vector<std::uint64_t> seeds;

  static SweepGrid from_json(const nlohmann::json& j);
  std::size_t num_runs() const { return variants.size() * noise.size() * seeds.size(); }
};

struct SweepRun {
  std::size_t variant = 0;
  std::size_t noise = 0;
  std::size_t seed = 0;
};
std::vector<SweepRun> sweep_runs(const SweepGrid& grid);

/// Executes one run of the grid and returns (f1, rmse).
std::pair<double, double> execute_run(const SweepGrid& grid, const SweepRun& run, Execution exec);

/// Aggregates results (same order as sweep_runs) into one row per
/// (variant, noise) cell.
std::vector<SweepCell> aggregate(const SweepGrid& grid, const std::vector<std::pair<double, double>>& results);

/// CSV with columns variant, noise, p, time_p, runs, f1_mean, f1_std,
/// rmse_mean, rmse_std, flag. flag is "degraded_f1_not_monotone" on a row
/// whose F1 exceeds the F1 of the same variant at a lower p.
std::string sweep_csv(const std::vector<SweepCell>& cells);

}  // namespace rdhp
