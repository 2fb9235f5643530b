#include "rdhp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "rdhp/checkpoint.hpp"
#include "rdhp/errors.hpp"

namespace rdhp {

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
  model.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(tau_m > 0.0) || !(tau_n > 0.0)) throw ConfigError("tau_m and tau_n must be positive");
  if (!(gce_beta > 0.0 && gce_beta <= 1.0)) throw ConfigError("gce_beta must lie in (0, 1]");
  if (clean_batch_size == 0) throw ConfigError("clean_batch_size must be positive");
  if (reweight_hidden == 0) throw ConfigError("reweight_hidden must be positive");
  if (!(reweight_decay >= 0.0)) throw ConfigError("reweight_decay must be >= 0");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (!(overparam_init_std >= 0.0)) throw ConfigError("overparam_init_std must be >= 0");
  if (select_by != "f1" && select_by != "rmse" && select_by != "last")
    throw ConfigError("select_by must be one of f1, rmse, last");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"model", model.to_json()},
          {"batch_size", batch_size},
          {"lr", lr},
          {"tau_m", tau_m},
          {"tau_n", tau_n},
          {"epochs", epochs},
          {"gce_beta", gce_beta},
          {"clean_batch_size", clean_batch_size},
          {"seed", seed},
          {"use_gce", use_gce},
          {"use_overparam", use_overparam},
          {"use_reweight", use_reweight},
          {"reweight_hidden", reweight_hidden},
          {"reweight_decay", reweight_decay},
          {"clip_norm", clip_norm},
          {"overparam_init_std", overparam_init_std},
          {"select_by", select_by},
          {"parallel", parallel}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::set<std::string> known = {
      "model",         "batch_size",  "lr",          "tau_m",           "tau_n",     "epochs",
      "gce_beta",      "clean_batch_size", "seed",   "use_gce",         "use_overparam", "use_reweight",
      "reweight_hidden", "reweight_decay", "clip_norm", "overparam_init_std", "select_by", "parallel"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown train config field '" + key + "'");
  TrainConfig c;
  try {
    if (j.contains("model")) {
      static const std::set<std::string> model_keys = {"num_types", "embed_dim", "attention_heads",
                                                       "attention_layers", "mlp_layers", "hidden_size", "dropout"};
      for (const auto& [key, value] : j.at("model").items())
        if (!model_keys.count(key)) throw ConfigError("unknown model config field '" + key + "'");
      c.model = ModelConfig::from_json(j.at("model"));
    }
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.tau_m = j.value("tau_m", c.tau_m);
    c.tau_n = j.value("tau_n", c.tau_n);
    c.epochs = j.value("epochs", c.epochs);
    c.gce_beta = j.value("gce_beta", c.gce_beta);
    c.clean_batch_size = j.value("clean_batch_size", c.clean_batch_size);
    c.seed = j.value("seed", c.seed);
    c.use_gce = j.value("use_gce", c.use_gce);
    c.use_overparam = j.value("use_overparam", c.use_overparam);
    c.use_reweight = j.value("use_reweight", c.use_reweight);
    c.reweight_hidden = j.value("reweight_hidden", c.reweight_hidden);
    c.reweight_decay = j.value("reweight_decay", c.reweight_decay);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.overparam_init_std = j.value("overparam_init_std", c.overparam_init_std);
    c.select_by = j.value("select_by", c.select_by);
    c.parallel = j.value("parallel", c.parallel);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::non_robust() const {
  TrainConfig c = *this;
  c.use_gce = false;
  c.use_overparam = false;
  c.use_reweight = false;
  return c;
}

// ---------------------------------------------------------------------------
// Samples and per-sequence losses

namespace {

constexpr std::uint64_t kShuffleStream = 0x5A0FF1E;
constexpr std::uint64_t kDropoutStream = 0xD20F;

struct Targets {
  std::vector<std::size_t> marks;
  std::vector<double> gaps;  // normalised and clamped to [0, 1]
};

Targets targets_of(const EventSequence& seq, double gap_scale) {
  Targets t;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    t.marks.push_back(seq.events[i + 1].mark);
    const double g = (seq.events[i + 1].time - seq.events[i].time) / gap_scale;
    t.gaps.push_back(std::clamp(g, 0.0, 1.0));
  }
  return t;
}

struct SeqLosses {
  ad::Tensor loss_v;  // (n)
  ad::Tensor loss_t;  // (n)
  ad::Tensor m;       // over-parameter leaves, (n), undefined when unused
  ad::Tensor n;
};

SeqLosses sequence_losses(const RdhpModel& model, const TrainConfig& cfg, const EventSequence& seq,
                          double gap_scale, CounterRng* dropout_rng, const OverParams* over) {
  const Targets tg = targets_of(seq, gap_scale);
  const std::size_t n = tg.marks.size();
  ModelOutput out = model.forward(seq, dropout_rng);
  ad::Tensor logits = ad::slice(out.logits, 0, 0, n);
  ad::Tensor time = ad::slice(out.time, 0, 0, n);
  SeqLosses r;
  r.loss_v = cfg.use_gce ? gce_loss(logits, tg.marks, cfg.gce_beta) : cce_loss(logits, tg.marks);
  ad::Tensor target = ad::Tensor::vector(tg.gaps);
  ad::Tensor p;
  if (over) {
    auto ms = over->m(seq.id);
    auto ns = over->n(seq.id);
    r.m = ad::Tensor::vector({ms.begin(), ms.end()}, true);
    r.n = ad::Tensor::vector({ns.begin(), ns.end()}, true);
    p = over_param(r.m, r.n, target);
  }
  r.loss_t = time_loss(time, p, target);
  return r;
}

std::vector<std::size_t> shuffled(std::size_t n, CounterRng rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::size_t replica_count(Execution exec, std::size_t work) {
  if (exec == Execution::serial) return 1;
  return std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(max_threads()), work));
}

bool finite_all(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

/// Weights rescaled so that all 2N entries average to 1. Relative weights,
/// including the sigma^v : sigma^t balance, are unchanged.
std::vector<double> rescale_weights(std::span<const double> w) {
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  std::vector<double> out(w.begin(), w.end());
  if (mean > 0.0)
    for (double& x : out) x /= mean;
  return out;
}

std::string dump_batch(const Dataset& data, const std::vector<std::size_t>& idx, std::size_t epoch,
                       std::size_t batch, const std::vector<std::vector<double>>& lv,
                       const std::vector<std::vector<double>>& lt) {
  nlohmann::json j;
  j["epoch"] = epoch;
  j["batch"] = batch;
  nlohmann::json seqs = nlohmann::json::array();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& s = data.sequences[idx[k]];
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : s.events) ev.push_back({e.time, e.mark});
    seqs.push_back({{"id", s.id}, {"events", ev}, {"loss_v", lv[k]}, {"loss_t", lt[k]}});
  }
  j["sequences"] = seqs;
  return j.dump();
}

}  // namespace

// ---------------------------------------------------------------------------
// State

std::unique_ptr<TrainState> TrainState::create(const TrainConfig& config, const Dataset& noisy_train) {
  config.validate();
  if (noisy_train.num_types != config.model.num_types)
    throw ConfigError("model.num_types " + std::to_string(config.model.num_types) + " does not match dataset K=" +
                      std::to_string(noisy_train.num_types));
  auto s = std::make_unique<TrainState>();
  s->config = config;
  s->model = RdhpModel(config.model, config.seed);
  s->over = OverParams(noisy_train, config.seed, config.overparam_init_std);
  s->reweight = ReweightNet(config.reweight_hidden, config.seed);
  s->reweight.zero_output_layer();
  const optim::AdamConfig adam{config.lr};
  s->opt_heads = optim::Adam([&] {
    auto p = s->model.mark_head();
    for (auto& q : s->model.time_head()) p.push_back(q);
    return p;
  }(), adam);
  s->opt_encoder = optim::Adam(s->model.encoder(), adam);
  s->opt_reweight = optim::Adam(s->reweight.parameters(), {config.lr, 0.9, 0.999, 1e-8, config.reweight_decay});
  const double g = noisy_train.max_gap.value_or(largest_gap(noisy_train));
  s->gap_scale = g > 0.0 ? g : 1.0;
  s->rng = CounterRng(config.seed, kShuffleStream);
  return s;
}

nlohmann::json TrainState::model_json() const {
  auto& self = const_cast<TrainState&>(*this);
  return {{"version", checkpoint::kFormatVersion},
          {"model_config", config.model.to_json()},
          {"gap_scale", gap_scale},
          {"epoch", epoch},
          {"params", checkpoint::encode(self.model.parameters())}};
}

void TrainState::save(const std::filesystem::path& dir) const {
  auto& self = const_cast<TrainState&>(*this);
  std::filesystem::create_directories(dir);
  checkpoint::write_json(dir / "model.json", model_json());
  checkpoint::write_json(dir / "overparams.json", over.to_json());
  nlohmann::json st = {{"version", checkpoint::kFormatVersion},
                       {"config", config.to_json()},
                       {"epoch", epoch},
                       {"gap_scale", gap_scale},
                       {"rng", {{"key", rng.key()}, {"counter", rng.counter()}}},
                       {"reweight", checkpoint::encode(self.reweight.parameters())},
                       {"opt_heads", opt_heads.state()},
                       {"opt_encoder", opt_encoder.state()},
                       {"opt_reweight", opt_reweight.state()}};
  checkpoint::write_json(dir / "state.json", st);
}

std::unique_ptr<TrainState> TrainState::load(const std::filesystem::path& dir) {
  const auto st = checkpoint::read_json(dir / "state.json");
  const auto mj = checkpoint::read_json(dir / "model.json");
  if (st.value("version", 0) != checkpoint::kFormatVersion) throw SchemaError("unsupported state.json version");
  const TrainConfig config = TrainConfig::from_json(st.at("config"));
  auto s = std::make_unique<TrainState>();
  s->config = config;
  s->model = RdhpModel(config.model, config.seed);
  checkpoint::decode(mj.at("params"), s->model.parameters());
  s->over = OverParams::from_json(checkpoint::read_json(dir / "overparams.json"));
  s->reweight = ReweightNet(config.reweight_hidden, config.seed);
  checkpoint::decode(st.at("reweight"), s->reweight.parameters());
  const optim::AdamConfig adam{config.lr};
  s->opt_heads = optim::Adam([&] {
    auto p = s->model.mark_head();
    for (auto& q : s->model.time_head()) p.push_back(q);
    return p;
  }(), adam);
  s->opt_encoder = optim::Adam(s->model.encoder(), adam);
  s->opt_reweight = optim::Adam(s->reweight.parameters(), {config.lr, 0.9, 0.999, 1e-8, config.reweight_decay});
  s->opt_heads.load_state(st.at("opt_heads"));
  s->opt_encoder.load_state(st.at("opt_encoder"));
  s->opt_reweight.load_state(st.at("opt_reweight"));
  s->gap_scale = st.at("gap_scale").get<double>();
  s->epoch = st.at("epoch").get<std::size_t>();
  s->rng = CounterRng::from_state(st.at("rng").at("key").get<std::uint64_t>(),
                                  st.at("rng").at("counter").get<std::uint64_t>());
  return s;
}

// ---------------------------------------------------------------------------
// Training

namespace {

/// Reweight-net step on one clean minibatch with the main networks frozen.
/// Returns false when nothing was scored.
bool update_reweight(TrainState& s, const Dataset& clean, const std::vector<std::size_t>& clean_order,
                     std::size_t batch_index, std::vector<RdhpModel>& replicas) {
  const auto& cfg = s.config;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < cfg.clean_batch_size && j < clean_order.size(); ++j)
    idx.push_back(clean_order[(batch_index * cfg.clean_batch_size + j) % clean_order.size()]);

  std::vector<std::vector<double>> lv(idx.size()), lt(idx.size());
  const std::size_t R = replicas.size();
  for_each_index(R > 1 ? Execution::parallel : Execution::serial, R, [&](std::size_t r) {
    for (std::size_t k = r; k < idx.size(); k += R) {
      const auto& seq = clean.sequences[idx[k]];
      if (seq.size() < 2) continue;
      SeqLosses l = sequence_losses(replicas[r], cfg, seq, s.gap_scale, nullptr, nullptr);
      lv[k].assign(l.loss_v.data().begin(), l.loss_v.data().end());
      lt[k].assign(l.loss_t.data().begin(), l.loss_t.data().end());
    }
  });
  std::vector<double> pairs, v, t;
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (std::size_t i = 0; i < lv[k].size(); ++i) {
      pairs.push_back(lv[k][i]);
      pairs.push_back(lt[k][i]);
      v.push_back(lv[k][i]);
      t.push_back(lt[k][i]);
    }
  if (v.empty()) return false;
  if (!finite_all(pairs)) throw NumericError("non-finite loss on the clean minibatch", "{}");
  const std::size_t N = v.size();
  s.opt_reweight.zero_grad();
  ad::Tensor w = s.reweight(ad::Tensor::matrix(N, 2, pairs));
  ad::Tensor loss = combined_loss(ad::Tensor::vector(v), ad::Tensor::vector(t), w);
  loss.backward();
  optim::clip_grad_norm(s.opt_reweight.params(), cfg.clip_norm);
  s.opt_reweight.step();
  return true;
}

}  // namespace

EpochMetrics train_epoch(TrainState& s, const Dataset& noisy_train, const Dataset& clean) {
  const auto& cfg = s.config;
  if (noisy_train.empty()) throw EmptyDatasetError("noisy training set is empty");
  if (cfg.use_reweight && clean.empty())
    throw ConfigError("use_reweight is on but the clean set is empty");
  s.trace.clear();

  const std::size_t epoch = s.epoch + 1;
  const Execution exec = cfg.execution();
  const auto order = shuffled(noisy_train.size(), s.rng.derive(2 * epoch));
  const auto clean_order = clean.empty() ? std::vector<std::size_t>{} : shuffled(clean.size(), s.rng.derive(2 * epoch + 1));

  nn::ParamList master = s.model.parameters();
  const std::size_t R = replica_count(exec, cfg.batch_size);
  std::vector<RdhpModel> replicas;
  for (std::size_t r = 0; r < R; ++r) replicas.push_back(s.model.clone());
  std::vector<nn::ParamList> replica_params;
  for (auto& rep : replicas) replica_params.push_back(rep.parameters());
  std::vector<std::size_t> offsets{0};
  for (const auto& p : master) offsets.push_back(offsets.back() + p.tensor->size());

  EpochMetrics em;
  em.epoch = epoch;
  double sum_v = 0.0, sum_t = 0.0, sum_sv = 0.0, sum_st = 0.0;

  const std::size_t num_batches = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
  for (std::size_t b = 0; b < num_batches; ++b) {
    std::vector<std::size_t> idx;
    for (std::size_t k = b * cfg.batch_size; k < std::min(order.size(), (b + 1) * cfg.batch_size); ++k)
      if (noisy_train.sequences[order[k]].size() >= 2) idx.push_back(order[k]);
    if (idx.empty()) continue;
    for (auto& rp : replica_params) nn::copy_values(master, rp);

    // (a) forward pass on the noisy minibatch; graphs stay alive for the
    // backward sweep once the weights are known.
    std::vector<SeqLosses> losses(idx.size());
    for_each_index(exec, R, [&](std::size_t r) {
      for (std::size_t k = r; k < idx.size(); k += R) {
        const auto& seq = noisy_train.sequences[idx[k]];
        CounterRng drop = CounterRng(cfg.seed, kDropoutStream).derive(mix64(epoch) ^ (b << 20) ^ k);
        losses[k] = sequence_losses(replicas[r], cfg, seq, s.gap_scale, &drop,
                                    cfg.use_overparam ? &s.over : nullptr);
      }
    });
    std::vector<double> pairs;
    std::vector<std::vector<double>> lv(idx.size()), lt(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      lv[k].assign(losses[k].loss_v.data().begin(), losses[k].loss_v.data().end());
      lt[k].assign(losses[k].loss_t.data().begin(), losses[k].loss_t.data().end());
      for (std::size_t i = 0; i < lv[k].size(); ++i) {
        pairs.push_back(lv[k][i]);
        pairs.push_back(lt[k][i]);
      }
    }
    const std::size_t N = pairs.size() / 2;
    if (!finite_all(pairs)) {
      std::string dump = dump_batch(noisy_train, idx, epoch, b, lv, lt);
      throw NumericError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " + std::to_string(b), dump);
    }

    // (b) reweight net on a clean minibatch, main networks frozen.
    if (cfg.use_reweight && update_reweight(s, clean, clean_order, b, replicas)) s.trace.push_back("reweight");

    // Weights for the noisy samples from the now-frozen reweight net.
    std::vector<double> sv(N, 1.0), st(N, 1.0);
    if (cfg.use_reweight) {
      ad::Tensor raw = s.reweight(ad::Tensor::matrix(N, 2, pairs));
      const std::vector<double> w = rescale_weights(raw.data());
      for (std::size_t i = 0; i < N; ++i) {
        sum_sv += raw.at(i, 0);
        sum_st += raw.at(i, 1);
        sv[i] = w[2 * i];
        st[i] = w[2 * i + 1];
      }
    } else {
      sum_sv += static_cast<double>(N);
      sum_st += static_cast<double>(N);
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      for (double x : lv[k]) sum_v += x;
      for (double x : lt[k]) sum_t += x;
    }

    // Weighted backward per sequence; each sequence's gradient is copied out
    // and the reduction below runs in index order.
    std::vector<std::size_t> first(idx.size() + 1, 0);
    for (std::size_t k = 0; k < idx.size(); ++k) first[k + 1] = first[k] + lv[k].size();
    std::vector<std::vector<double>> grads(idx.size());
    std::vector<std::vector<double>> gm(idx.size()), gn(idx.size());
    for_each_index(exec, R, [&](std::size_t r) {
      for (std::size_t k = r; k < idx.size(); k += R) {
        const std::size_t n = lv[k].size();
        std::vector<double> wv(sv.begin() + first[k], sv.begin() + first[k] + n);
        std::vector<double> wt(st.begin() + first[k], st.begin() + first[k] + n);
        ad::Tensor loss = ad::scale(
            ad::sum(ad::add(ad::mul(ad::Tensor::vector(wv), losses[k].loss_v),
                            ad::mul(ad::Tensor::vector(wt), losses[k].loss_t))),
            1.0 / static_cast<double>(N));
        nn::zero_grads(replica_params[r]);
        loss.backward();
        auto& g = grads[k];
        g.assign(offsets.back(), 0.0);
        for (std::size_t p = 0; p < replica_params[r].size(); ++p) {
          auto src = replica_params[r][p].tensor->grad();
          if (!src.empty()) std::copy(src.begin(), src.end(), g.begin() + offsets[p]);
        }
        if (losses[k].m.defined()) {
          gm[k].assign(losses[k].m.grad().begin(), losses[k].m.grad().end());
          gn[k].assign(losses[k].n.grad().begin(), losses[k].n.grad().end());
        }
        losses[k] = {};
      }
    });
    for (std::size_t p = 0; p < master.size(); ++p) {
      auto& g = master[p].tensor->node()->grad;
      g.assign(master[p].tensor->size(), 0.0);
      for (std::size_t k = 0; k < idx.size(); ++k)
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += grads[k][offsets[p] + j];
    }
    const double norm = optim::clip_grad_norm(master, cfg.clip_norm);
    if (norm > cfg.clip_norm) ++em.clipped;

    // (c) stage 1: M_e and M_t.
    s.opt_heads.step();
    s.trace.push_back("heads");

    // (d) stage 2: per-sample over-parameters, projected SGD on the
    // per-sample gradient.
    if (cfg.use_overparam) {
      const double Nd = static_cast<double>(N);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        auto m = s.over.m(noisy_train.sequences[idx[k]].id);
        auto n = s.over.n(noisy_train.sequences[idx[k]].id);
        for (std::size_t i = 0; i < m.size(); ++i) {
          m[i] = std::clamp(m[i] - cfg.tau_m * cfg.lr * Nd * gm[k][i], -1.0, 1.0);
          n[i] = std::clamp(n[i] - cfg.tau_n * cfg.lr * Nd * gn[k][i], -1.0, 1.0);
        }
      }
      s.trace.push_back("overparams");
    }

    // (e) stage 3: encoder.
    s.opt_encoder.step();
    s.trace.push_back("encoder");
    nn::zero_grads(master);

    em.samples += N;
    ++em.batches;
  }

  const double n = static_cast<double>(std::max<std::size_t>(em.samples, 1));
  em.loss_v = sum_v / n;
  em.loss_t = sum_t / n;
  em.sigma_v = sum_sv / n;
  em.sigma_t = sum_st / n;
  s.epoch = epoch;
  return em;
}

namespace {

bool better(const TrainConfig& cfg, const EpochMetrics& cand, const EpochMetrics& best) {
  if (cfg.select_by == "last") return true;
  if (cfg.select_by == "rmse")
    return cand.val_rmse < best.val_rmse || (cand.val_rmse == best.val_rmse && cand.val_f1 > best.val_f1);
  return cand.val_f1 > best.val_f1 || (cand.val_f1 == best.val_f1 && cand.val_rmse < best.val_rmse);
}

}  // namespace

void fit_more(TrainState& state, const Dataset& noisy_train, const Dataset& clean, const Dataset& val,
              std::vector<EpochMetrics>& history) {
  while (state.epoch < state.config.epochs) {
    EpochMetrics em = train_epoch(state, noisy_train, clean);
    if (!val.empty()) {
      const EvalResult r = evaluate(predictor_of(state), val, state.config.execution());
      em.val_f1 = r.f1;
      em.val_rmse = r.rmse;
    }
    history.push_back(em);
  }
}

FitResult fit(const TrainConfig& config, const Dataset& noisy_train, const Dataset& clean, const Dataset& val,
              const std::filesystem::path& out_dir) {
  FitResult res;
  res.state = TrainState::create(config, noisy_train);
  res.best_model = res.state->model_json();
  EpochMetrics best;
  best.val_f1 = -1.0;
  best.val_rmse = std::numeric_limits<double>::infinity();
  while (res.state->epoch < config.epochs) {
    EpochMetrics em = train_epoch(*res.state, noisy_train, clean);
    if (!val.empty()) {
      const EvalResult r = evaluate(predictor_of(*res.state), val, config.execution());
      em.val_f1 = r.f1;
      em.val_rmse = r.rmse;
    }
    res.history.push_back(em);
    if (res.best_epoch == 0 || better(config, em, best)) {
      best = em;
      res.best_epoch = em.epoch;
      res.best_model = res.state->model_json();
    }
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    res.state->save(out_dir / "last");
    checkpoint::write_json(out_dir / "model.json", res.best_model);
    checkpoint::write_json(out_dir / "overparams.json", res.state->over.to_json());
    std::ofstream(out_dir / "history.csv") << history_csv(res.history);
  }
  return res;
}

std::string history_csv(const std::vector<EpochMetrics>& history) {
  std::ostringstream os;
  os << "epoch,train_loss_v,train_loss_t,sigma_v_mean,sigma_t_mean,val_f1,val_rmse\n";
  os << std::setprecision(17);
  for (const auto& h : history)
    os << h.epoch << ',' << h.loss_v << ',' << h.loss_t << ',' << h.sigma_v << ',' << h.sigma_t << ',' << h.val_f1
       << ',' << h.val_rmse << '\n';
  return os.str();
}

std::vector<double> sigma_variation(const std::vector<EpochMetrics>& history) {
  std::vector<double> out;
  double pv = 0.5, pt = 0.5;
  for (const auto& h : history) {
    out.push_back(std::abs(h.sigma_v - pv) + std::abs(h.sigma_t - pt));
    pv = h.sigma_v;
    pt = h.sigma_t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inference

Predictor Predictor::from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != checkpoint::kFormatVersion) throw SchemaError("unsupported model.json version");
  Predictor p;
  p.model = RdhpModel(ModelConfig::from_json(j.at("model_config")), 0);
  checkpoint::decode(j.at("params"), p.model.parameters());
  p.gap_scale = j.at("gap_scale").get<double>();
  return p;
}

Predictor Predictor::load(const std::filesystem::path& ckpt_dir) {
  const auto file = std::filesystem::is_directory(ckpt_dir) ? ckpt_dir / "model.json" : ckpt_dir;
  if (!std::filesystem::exists(file)) throw IoError("checkpoint not found: " + file.string());
  return from_json(checkpoint::read_json(file));
}

Predictor predictor_of(const TrainState& state) {
  Predictor p;
  p.model = state.model.clone();
  p.gap_scale = state.gap_scale;
  return p;
}

NextEvent predict_next(const Predictor& predictor, const EventSequence& seq) {
  if (seq.empty()) throw DomainError("predict_next: empty sequence");
  const ModelOutput out = predictor.model.forward(seq);
  const std::size_t last = seq.size() - 1, K = out.logits.dim(1);
  NextEvent ev;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k)
    if (out.logits.at(last, k) > best) {
      best = out.logits.at(last, k);
      ev.mark = static_cast<Mark>(k);
    }
  ev.gap = std::max(0.0, out.time.at(last)) * predictor.gap_scale;
  ev.time = seq.events.back().time + ev.gap;
  return ev;
}

NextEvent predict_next(const TrainState& state, const EventSequence& seq) {
  return predict_next(predictor_of(state), seq);
}

Predictions predict_dataset(const Predictor& predictor, const Dataset& data, Execution exec) {
  std::vector<Predictions> per(data.size());
  for_each_index(exec, data.size(), [&](std::size_t s) {
    const auto& seq = data.sequences[s];
    if (seq.size() < 2) return;
    const ModelOutput out = predictor.model.forward(seq);
    const std::size_t K = out.logits.dim(1);
    auto& p = per[s];
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      std::size_t arg = 0;
      for (std::size_t k = 1; k < K; ++k)
        if (out.logits.at(i, k) > out.logits.at(i, arg)) arg = k;
      p.pred_marks.push_back(static_cast<Mark>(arg));
      p.true_marks.push_back(seq.events[i + 1].mark);
      p.pred_gaps.push_back(std::max(0.0, out.time.at(i)) * predictor.gap_scale);
      p.true_gaps.push_back(seq.events[i + 1].time - seq.events[i].time);
    }
  });
  Predictions all;
  for (auto& p : per) {
    all.pred_marks.insert(all.pred_marks.end(), p.pred_marks.begin(), p.pred_marks.end());
    all.true_marks.insert(all.true_marks.end(), p.true_marks.begin(), p.true_marks.end());
    all.pred_gaps.insert(all.pred_gaps.end(), p.pred_gaps.begin(), p.pred_gaps.end());
    all.true_gaps.insert(all.true_gaps.end(), p.true_gaps.begin(), p.true_gaps.end());
  }
  return all;
}

nlohmann::json EvalResult::to_json() const {
  return {{"macro_f1", f1}, {"rmse", rmse}, {"samples", samples}, {"confusion", confusion.counts}};
}

EvalResult evaluate(const Predictor& predictor, const Dataset& data, Execution exec) {
  const Predictions p = predict_dataset(predictor, data, exec);
  if (p.pred_marks.empty()) throw EmptyDatasetError("evaluation set has no next-event targets");
  EvalResult r;
  const std::size_t K = predictor.model.config().num_types;
  r.confusion = confusion(p.pred_marks, p.true_marks, K);
  r.f1 = macro_f1(p.pred_marks, p.true_marks, K);
  r.rmse = rmse(p.pred_gaps, p.true_gaps);
  r.samples = p.pred_marks.size();
  return r;
}

}  // namespace rdhp
