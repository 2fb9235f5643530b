#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "rdhp/nn.hpp"
#include "rdhp/tensor.hpp"
#include "rdhp/tpp_core.hpp"

namespace rdhp {

struct ModelConfig {
  std::uint32_t num_types = 4;
  std::size_t embed_dim = 32;
  std::size_t attention_heads = 8;
  std::size_t attention_layers = 4;
  std::size_t mlp_layers = 3;
  std::size_t hidden_size = 32;
  double dropout = 0.2;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Fixed sinusoidal encoding T[i][k] = sin(position_freq[k] * i + time_freq[k] * t_i + phase[k]).
struct TemporalEncoding {
  std::vector<double> position_freq;
  std::vector<double> time_freq;
  std::vector<double> phase;

  /// position_freq[k] = time_freq[k] = 10000^(-2 floor(k/2) / d); phase 0 on
  /// even dimensions and pi/2 (cosine) on odd ones.
  static TemporalEncoding standard(std::size_t dim);
  /// All-zero frequencies and phases (the encoding vanishes).
  static TemporalEncoding zero(std::size_t dim);

  /// (L x d) constant tensor for the sequence.
  ad::Tensor encode(const EventSequence& seq) const;
};

/// Per-position Hawkes parameters for the next event, each (L x K).
struct IntensityHead {
  ad::Tensor mu;
  ad::Tensor alpha;
  ad::Tensor gamma;
};

/// lambda_o(dt) = softplus(mu_o + (alpha_o - mu_o) exp(-gamma_o dt)) for one
/// position. Throws DomainError for dt < 0.
std::vector<double> intensity_curve(std::span<const double> mu, std::span<const double> alpha,
                                    std::span<const double> gamma, double dt);

/// One causal Gaussian-kernel attention block: per head,
/// h_i = sum_{j<=i} f(q_i, k_j) g(x_j) / sum_{j<=i} f(q_i, k_j) with
/// f(q, k) = exp(-||q - k||^2 / sqrt(d_head)); heads are averaged, then a
/// residual connection and layer norm.
class AttentionLayer {
 public:
  AttentionLayer() = default;
  AttentionLayer(std::size_t dim, std::size_t heads, CounterRng& rng);

  /// Pre-residual attention output (L x d).
  ad::Tensor attend(const ad::Tensor& x, double dropout_rate, CounterRng* rng) const;
  ad::Tensor operator()(const ad::Tensor& x, double dropout_rate, CounterRng* rng) const;
  void collect(const std::string& prefix, nn::ParamList& out);

  std::size_t heads() const { return query_.size(); }
  nn::Linear& value(std::size_t h) { return value_[h]; }

 private:
  std::vector<nn::Linear> query_;
  std::vector<nn::Linear> key_;
  std::vector<nn::Linear> value_;
  nn::LayerNorm norm_;
  double temperature_ = 1.0;
};

struct ModelOutput {
  ad::Tensor hidden;    // (L x d)
  IntensityHead head;   // (L x K) each
  ad::Tensor features;  // (L x 3K)
  ad::Tensor logits;    // (L x K), row i scores the mark of event i+1
  ad::Tensor time;      // (L), row i is the normalised gap t_{i+1} - t_i
};

/// Deep Hawkes encoder with event-type head M_e and gap head M_t.
///
/// Parameter groups: encoder() holds the type embedding, attention stack and
/// intensity projections; mark_head() is M_e; time_head() is M_t.
class RdhpModel {
 public:
  RdhpModel() = default;
  RdhpModel(const ModelConfig& config, std::uint64_t seed);

  /// Deep copy with independent parameter storage.
  RdhpModel clone() const;

  const ModelConfig& config() const { return config_; }
  const TemporalEncoding& temporal_encoding() const { return encoding_; }
  void set_temporal_encoding(TemporalEncoding enc);

  /// x_i = S_{m_i} + T_i, (L x d).
  ad::Tensor embed(const EventSequence& seq) const;
  /// Stacked attention blocks; dropout is active only when rng is non-null.
  ad::Tensor encode(const ad::Tensor& embeddings, CounterRng* rng = nullptr) const;
  IntensityHead intensity_params(const ad::Tensor& hidden) const;
  /// [softplus(alpha) | softplus(mu) | gamma], i.e. lambda(0), lambda(inf)
  /// and the decay rate, (L x 3K).
  static ad::Tensor head_features(const IntensityHead& head);
  /// Runs M_e and M_t on head features: (logits L x K, time L).
  std::pair<ad::Tensor, ad::Tensor> predict(const ad::Tensor& features, CounterRng* rng = nullptr) const;

  ModelOutput forward(const EventSequence& seq, CounterRng* rng = nullptr) const;

  nn::ParamList parameters();
  nn::ParamList encoder();
  nn::ParamList mark_head();
  nn::ParamList time_head();

  ad::Tensor& type_embedding() { return type_embedding_; }
  nn::Mlp& mark_mlp() { return mark_mlp_; }
  nn::Mlp& time_mlp() { return time_mlp_; }
  std::vector<AttentionLayer>& layers() { return layers_; }

 private:
  ModelConfig config_;
  TemporalEncoding encoding_;
  ad::Tensor type_embedding_;  // W_s, (K x d)
  std::vector<AttentionLayer> layers_;
  nn::Linear w_mu_;
  nn::Linear w_alpha_;
  nn::Linear w_gamma_;
  nn::Mlp mark_mlp_;
  nn::Mlp time_mlp_;
};

}  // namespace rdhp
