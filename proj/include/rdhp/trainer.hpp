#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdhp/eval_metrics.hpp"
#include "rdhp/model.hpp"
#include "rdhp/optim.hpp"
#include "rdhp/parallel.hpp"
#include "rdhp/robust_losses.hpp"
#include "rdhp/rng.hpp"
#include "rdhp/tpp_core.hpp"

namespace rdhp {

struct TrainConfig {
  ModelConfig model;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  double tau_m = 1.0;
  double tau_n = 1.0;
  std::size_t epochs = 20;
  double gce_beta = 0.7;
  std::size_t clean_batch_size = 16;
  std::uint64_t seed = 0;
  bool use_gce = true;
  bool use_overparam = true;
  bool use_reweight = true;
  std::size_t reweight_hidden = 64;
  /// Decoupled weight decay on the reweight net. Keeps the weight-vs-loss
  /// slope bounded; without it alternating minimisation of the clean loss
  /// drives the weights towards a step function of the loss.
  double reweight_decay = 10.0;
  double clip_norm = 5.0;
  double overparam_init_std = 1e-8;
  /// Validation criterion for the kept checkpoint: "f1", "rmse" or "last".
  std::string select_by = "f1";
  /// Run per-sequence gradients on the OpenMP kernel.
  bool parallel = true;

  void validate() const;
  nlohmann::json to_json() const;
  /// Unknown keys are rejected; missing keys keep their defaults.
  static TrainConfig from_json(const nlohmann::json& j);

  /// CCE + plain MAE, no over-parameters, no re-weighting.
  TrainConfig non_robust() const;
  Execution execution() const { return parallel ? Execution::parallel : Execution::serial; }
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss_v = 0.0;
  double loss_t = 0.0;
  double sigma_v = 0.0;
  double sigma_t = 0.0;
  double val_f1 = 0.0;
  double val_rmse = 0.0;
  std::size_t batches = 0;
  std::size_t samples = 0;
  std::size_t clipped = 0;
};

/// Everything that evolves during training. Optimisers hold pointers into the
/// model, reweight net and so on, so a state lives behind a unique_ptr and is
/// never copied.
struct TrainState {
  TrainConfig config;
  RdhpModel model;
  OverParams over;
  ReweightNet reweight;
  optim::Adam opt_heads;
  optim::Adam opt_encoder;
  optim::Adam opt_reweight;
  /// Target gaps are divided by this before training; predictions multiply back.
  double gap_scale = 1.0;
  std::size_t epoch = 0;
  CounterRng rng;
  /// Update order of the last train_epoch call, one name per stage per batch.
  std::vector<std::string> trace;

  TrainState() = default;
  TrainState(const TrainState&) = delete;
  TrainState& operator=(const TrainState&) = delete;

  /// Gap-scale and state for a fresh run on this noisy training set.
  static std::unique_ptr<TrainState> create(const TrainConfig& config, const Dataset& noisy_train);

  /// Writes model.json, overparams.json and state.json into dir.
  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<TrainState> load(const std::filesystem::path& dir);

  nlohmann::json model_json() const;
};

/// One pass over the noisy training set in minibatches. Per batch: forward,
/// reweight-net step on a clean minibatch, then head, over-parameter and
/// encoder updates. Throws NumericError for a non-finite loss.
EpochMetrics train_epoch(TrainState& state, const Dataset& noisy_train, const Dataset& clean);

struct FitResult {
  std::unique_ptr<TrainState> state;
  std::vector<EpochMetrics> history;
  /// Parameters of the epoch kept by the validation criterion (model.json layout).
  nlohmann::json best_model;
  std::size_t best_epoch = 0;
};

/// Runs config.epochs epochs from a fresh state, tracking validation F1 and
/// RMSE. When out_dir is non-empty, writes history.csv, the kept model
/// (model.json) and the final training state.
FitResult fit(const TrainConfig& config, const Dataset& noisy_train, const Dataset& clean, const Dataset& val,
              const std::filesystem::path& out_dir = {});

/// Continues an existing state up to config.epochs.
void fit_more(TrainState& state, const Dataset& noisy_train, const Dataset& clean, const Dataset& val,
              std::vector<EpochMetrics>& history);

std::string history_csv(const std::vector<EpochMetrics>& history);

/// Inference-only model: network weights plus the gap scale.
struct Predictor {
  RdhpModel model;
  double gap_scale = 1.0;

  static Predictor from_json(const nlohmann::json& model_json);
  static Predictor load(const std::filesystem::path& ckpt_dir);
};

Predictor predictor_of(const TrainState& state);

struct NextEvent {
  Mark mark = 0;
  /// Absolute time of the predicted next event.
  double time = 0.0;
  double gap = 0.0;
};

/// Argmax mark and de-normalised gap (clamped at 0) after the last event.
NextEvent predict_next(const Predictor& predictor, const EventSequence& seq);
NextEvent predict_next(const TrainState& state, const EventSequence& seq);

/// Teacher-forced predictions for every next event of every sequence.
struct Predictions {
  std::vector<Mark> pred_marks;
  std::vector<Mark> true_marks;
  std::vector<double> pred_gaps;
  std::vector<double> true_gaps;
};

Predictions predict_dataset(const Predictor& predictor, const Dataset& data, Execution exec = Execution::parallel);

struct EvalResult {
  double f1 = 0.0;
  double rmse = 0.0;
  std::size_t samples = 0;
  ConfusionMatrix confusion;

  nlohmann::json to_json() const;
};

EvalResult evaluate(const Predictor& predictor, const Dataset& data, Execution exec = Execution::parallel);

/// |delta sigma| per epoch: |sigma_v(e) - sigma_v(e-1)| + |sigma_t(e) - sigma_t(e-1)|,
/// with the untrained weights (0.5, 0.5) before epoch 1.
std::vector<double> sigma_variation(const std::vector<EpochMetrics>& history);

}  // namespace rdhp
