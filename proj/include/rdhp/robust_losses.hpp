#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "rdhp/nn.hpp"
#include "rdhp/tensor.hpp"
#include "rdhp/tpp_core.hpp"

namespace rdhp {

struct GceConfig {
  double beta = 0.7;
  void validate() const;
};

/// (1 - q^beta) / beta for a target probability q.
double gce_value(double q, double beta);

/// Per-sample generalised cross-entropy, (N): q = softmax(logits)[target],
/// loss = (1 - q^beta) / beta with q^beta formed as exp(beta * log q).
ad::Tensor gce_loss(const ad::Tensor& logits, const std::vector<std::size_t>& targets, double beta);
/// Per-sample categorical cross-entropy, (N).
ad::Tensor cce_loss(const ad::Tensor& logits, const std::vector<std::size_t>& targets);

/// m^2 t - n^2 (1 - t).
double over_param_value(double m, double n, double t);
ad::Tensor over_param(const ad::Tensor& m, const ad::Tensor& n, const ad::Tensor& target);

/// |prediction + p - target| element-wise; p may be undefined (treated as 0).
ad::Tensor time_loss(const ad::Tensor& prediction, const ad::Tensor& p, const ad::Tensor& target);

/// Per-sample pair (m_i, n_i) for every next-event target of a training set,
/// keyed by (sequence id, position). Position i is the sample that predicts
/// event i + 1 from events 0..i.
class OverParams {
 public:
  OverParams() = default;
  /// Gaussian init with mean 0 and the given std.
  OverParams(const Dataset& train, std::uint64_t seed, double init_std = 1e-8);

  bool contains(const std::string& seq_id) const { return offset_.count(seq_id) != 0; }
  std::size_t size() const { return m_.size(); }
  bool empty() const { return m_.empty(); }

  std::span<double> m(const std::string& seq_id);
  std::span<double> n(const std::string& seq_id);
  std::span<const double> m(const std::string& seq_id) const;
  std::span<const double> n(const std::string& seq_id) const;
  const std::vector<double>& all_m() const { return m_; }
  const std::vector<double>& all_n() const { return n_; }

  /// Clamp every entry into [-1, 1].
  void project();
  double max_abs() const;

  /// {"version": 1, "sequences": {id: {"m": [...], "n": [...]}}}
  nlohmann::json to_json() const;
  static OverParams from_json(const nlohmann::json& j);
  friend bool operator==(const OverParams&, const OverParams&) = default;

 private:
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> offset_;  // id -> (offset, count)
  std::vector<std::string> order_;
  std::vector<double> m_;
  std::vector<double> n_;
};

/// Small MLP r_eps mapping a per-sample loss pair (L^v, L^t) to weights
/// (sigma^v, sigma^t) in (0, 1): 2 -> hidden (gelu) -> 2 (sigmoid).
class ReweightNet {
 public:
  ReweightNet() = default;
  ReweightNet(std::size_t hidden, std::uint64_t seed);

  ReweightNet clone() const;

  /// losses: (N x 2) -> weights (N x 2).
  ad::Tensor operator()(const ad::Tensor& losses) const;
  /// Zeroes the output layer, so every weight starts at exactly 0.5.
  void zero_output_layer();
  nn::ParamList parameters();

 private:
  nn::Linear hidden_;
  nn::Linear output_;
};

/// Mean over the batch of sigma^v L^v + sigma^t L^t. weights is (N x 2).
ad::Tensor combined_loss(const ad::Tensor& loss_v, const ad::Tensor& loss_t, const ad::Tensor& weights);

}  // namespace rdhp
