#include "rdhp/model.hpp"

#include <cmath>
#include <numbers>

#include "rdhp/errors.hpp"

namespace rdhp {

void ModelConfig::validate() const {
  if (num_types == 0 || embed_dim == 0 || attention_heads == 0 || attention_layers == 0 ||
      mlp_layers == 0 || hidden_size == 0)
    throw ConfigError("model sizes must be positive");
  if (embed_dim % attention_heads != 0) throw ConfigError("embed_dim must be divisible by attention_heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"num_types", num_types},       {"embed_dim", embed_dim},
          {"attention_heads", attention_heads}, {"attention_layers", attention_layers},
          {"mlp_layers", mlp_layers},     {"hidden_size", hidden_size},
          {"dropout", dropout}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.num_types = j.value("num_types", c.num_types);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.attention_heads = j.value("attention_heads", c.attention_heads);
  c.attention_layers = j.value("attention_layers", c.attention_layers);
  c.mlp_layers = j.value("mlp_layers", c.mlp_layers);
  c.hidden_size = j.value("hidden_size", c.hidden_size);
  c.dropout = j.value("dropout", c.dropout);
  return c;
}

TemporalEncoding TemporalEncoding::standard(std::size_t dim) {
  TemporalEncoding e;
  for (std::size_t k = 0; k < dim; ++k) {
    const double f = std::pow(10000.0, -2.0 * static_cast<double>(k / 2) / static_cast<double>(dim));
    e.position_freq.push_back(f);
    e.time_freq.push_back(f);
    e.phase.push_back(k % 2 == 0 ? 0.0 : std::numbers::pi / 2.0);
  }
  return e;
}

TemporalEncoding TemporalEncoding::zero(std::size_t dim) {
  TemporalEncoding e;
  e.position_freq.assign(dim, 0.0);
  e.time_freq.assign(dim, 0.0);
  e.phase.assign(dim, 0.0);
  return e;
}

ad::Tensor TemporalEncoding::encode(const EventSequence& seq) const {
  const std::size_t L = seq.size(), d = phase.size();
  std::vector<double> out(L * d);
  for (std::size_t i = 0; i < L; ++i) {
    const double t = seq.events[i].time;
    for (std::size_t k = 0; k < d; ++k)
      out[i * d + k] = std::sin(position_freq[k] * static_cast<double>(i) + time_freq[k] * t + phase[k]);
  }
  return ad::Tensor::matrix(L, d, std::move(out));
}

std::vector<double> intensity_curve(std::span<const double> mu, std::span<const double> alpha,
                                    std::span<const double> gamma, double dt) {
  if (dt < 0.0) throw DomainError("intensity_curve: dt must be >= 0");
  if (alpha.size() != mu.size() || gamma.size() != mu.size())
    throw ShapeError("intensity_curve: mu, alpha, gamma lengths differ");
  std::vector<double> out(mu.size());
  for (std::size_t o = 0; o < mu.size(); ++o) {
    const double z = mu[o] + (alpha[o] - mu[o]) * std::exp(-gamma[o] * dt);
    out[o] = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return out;
}

AttentionLayer::AttentionLayer(std::size_t dim, std::size_t heads, CounterRng& rng) : norm_(dim) {
  const std::size_t dh = dim / heads;
  for (std::size_t h = 0; h < heads; ++h) {
    query_.emplace_back(dim, dh, rng, false);
    key_.emplace_back(dim, dh, rng, false);
    value_.emplace_back(dim, dim, rng, true);
  }
  temperature_ = std::sqrt(static_cast<double>(dh));
}

ad::Tensor AttentionLayer::attend(const ad::Tensor& x, double dropout_rate, CounterRng* rng) const {
  ad::Tensor acc;
  for (std::size_t h = 0; h < query_.size(); ++h) {
    ad::Tensor w = ad::causal_gaussian_weights(query_[h](x), key_[h](x), temperature_);
    if (rng && dropout_rate > 0.0) w = ad::dropout(w, dropout_rate, *rng);
    ad::Tensor out = ad::matmul(w, value_[h](x));
    acc = acc.defined() ? ad::add(acc, out) : out;
  }
  return query_.size() == 1 ? acc : ad::scale(acc, 1.0 / static_cast<double>(query_.size()));
}

ad::Tensor AttentionLayer::operator()(const ad::Tensor& x, double dropout_rate, CounterRng* rng) const {
  return norm_(ad::add(x, attend(x, dropout_rate, rng)));
}

void AttentionLayer::collect(const std::string& prefix, nn::ParamList& out) {
  for (std::size_t h = 0; h < query_.size(); ++h) {
    const std::string p = prefix + ".head" + std::to_string(h);
    query_[h].collect(p + ".query", out);
    key_[h].collect(p + ".key", out);
    value_[h].collect(p + ".value", out);
  }
  norm_.collect(prefix + ".norm", out);
}

RdhpModel::RdhpModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), encoding_(TemporalEncoding::standard(config.embed_dim)) {
  config_.validate();
  CounterRng rng(seed, 0x30DE1);
  const std::size_t K = config_.num_types, d = config_.embed_dim;
  std::vector<double> ws(K * d);
  for (double& x : ws) x = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  type_embedding_ = ad::Tensor::matrix(K, d, std::move(ws), true);
  for (std::size_t l = 0; l < config_.attention_layers; ++l) layers_.emplace_back(d, config_.attention_heads, rng);
  w_mu_ = nn::Linear(d, K, rng);
  w_alpha_ = nn::Linear(d, K, rng);
  w_gamma_ = nn::Linear(d, K, rng);
  mark_mlp_ = nn::Mlp(3 * K, config_.hidden_size, K, config_.mlp_layers, rng);
  time_mlp_ = nn::Mlp(3 * K, config_.hidden_size, 1, config_.mlp_layers, rng);
}

RdhpModel RdhpModel::clone() const {
  RdhpModel copy = *this;
  nn::detach_storage(copy.parameters());
  return copy;
}

void RdhpModel::set_temporal_encoding(TemporalEncoding enc) {
  if (enc.phase.size() != config_.embed_dim) throw ShapeError("temporal encoding width must equal embed_dim");
  encoding_ = std::move(enc);
}

ad::Tensor RdhpModel::embed(const EventSequence& seq) const {
  const std::size_t K = config_.num_types;
  std::vector<std::size_t> marks;
  marks.reserve(seq.size());
  for (const auto& e : seq.events) {
    if (e.mark >= K) throw DomainError("embed: mark " + std::to_string(e.mark) + " out of range");
    marks.push_back(e.mark);
  }
  // One-hot rows times W_s.
  std::vector<double> onehot(seq.size() * K, 0.0);
  for (std::size_t i = 0; i < marks.size(); ++i) onehot[i * K + marks[i]] = 1.0;
  ad::Tensor s = ad::matmul(ad::Tensor::matrix(seq.size(), K, std::move(onehot)), type_embedding_);
  return ad::add(s, encoding_.encode(seq));
}

ad::Tensor RdhpModel::encode(const ad::Tensor& embeddings, CounterRng* rng) const {
  ad::Tensor h = embeddings;
  for (const auto& layer : layers_) h = layer(h, config_.dropout, rng);
  return h;
}

IntensityHead RdhpModel::intensity_params(const ad::Tensor& hidden) const {
  return {ad::gelu(w_mu_(hidden)), ad::gelu(w_alpha_(hidden)), ad::softplus(w_gamma_(hidden))};
}

ad::Tensor RdhpModel::head_features(const IntensityHead& head) {
  return ad::concat({ad::softplus(head.alpha), ad::softplus(head.mu), head.gamma}, head.mu.rank() - 1);
}

std::pair<ad::Tensor, ad::Tensor> RdhpModel::predict(const ad::Tensor& features, CounterRng* rng) const {
  ad::Tensor logits = mark_mlp_(features, config_.dropout, rng);
  ad::Tensor time = time_mlp_(features, config_.dropout, rng);
  const std::size_t rows = features.rank() == 2 ? features.dim(0) : 1;
  time = ad::reshape(time, features.rank() == 2 ? ad::Shape{rows} : ad::Shape{});
  return {logits, time};
}

ModelOutput RdhpModel::forward(const EventSequence& seq, CounterRng* rng) const {
  if (seq.empty()) throw DomainError("forward: empty sequence");
  ModelOutput out;
  out.hidden = encode(embed(seq), rng);
  out.head = intensity_params(out.hidden);
  out.features = head_features(out.head);
  std::tie(out.logits, out.time) = predict(out.features, rng);
  return out;
}

nn::ParamList RdhpModel::encoder() {
  nn::ParamList out;
  out.push_back({"encoder.type_embedding", &type_embedding_});
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].collect("encoder.layer" + std::to_string(l), out);
  w_mu_.collect("encoder.w_mu", out);
  w_alpha_.collect("encoder.w_alpha", out);
  w_gamma_.collect("encoder.w_gamma", out);
  return out;
}

nn::ParamList RdhpModel::mark_head() {
  nn::ParamList out;
  mark_mlp_.collect("mark_head", out);
  return out;
}

nn::ParamList RdhpModel::time_head() {
  nn::ParamList out;
  time_mlp_.collect("time_head", out);
  return out;
}

nn::ParamList RdhpModel::parameters() {
  nn::ParamList out = encoder();
  for (auto& p : mark_head()) out.push_back(p);
  for (auto& p : time_head()) out.push_back(p);
  return out;
}

}  // namespace rdhp
