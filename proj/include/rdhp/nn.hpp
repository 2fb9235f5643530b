#pragma once

#include <string>
#include <vector>

#include "rdhp/rng.hpp"
#include "rdhp/tensor.hpp"

namespace rdhp::nn {

struct NamedParam {
  std::string name;
  ad::Tensor* tensor = nullptr;
};
using ParamList = std::vector<NamedParam>;

/// Replaces every tensor in the list with an independent leaf copy, so a
/// copied module stops sharing storage with its source.
void detach_storage(const ParamList& params);
void copy_values(const ParamList& from, const ParamList& to);
void zero_grads(const ParamList& params);
std::vector<ad::Tensor*> tensors_of(const ParamList& params);
std::size_t count_scalars(const ParamList& params);

/// y = x W + b with W stored (in x out).
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, CounterRng& rng, bool with_bias = true);

  ad::Tensor operator()(const ad::Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out);
  void zero();

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }

  ad::Tensor weight;
  ad::Tensor bias;
};

/// Row normalisation followed by a learned gain and shift.
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(std::size_t features);

  ad::Tensor operator()(const ad::Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out);

  ad::Tensor gain;
  ad::Tensor shift;
};

/// Stack of Linear layers with gelu between them (none after the last).
class Mlp {
 public:
  Mlp() = default;
  /// layers >= 1 linear maps: in -> hidden -> ... -> hidden -> out.
  Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t layers, CounterRng& rng);

  /// dropout_rate applies to hidden activations when rng is non-null.
  ad::Tensor operator()(const ad::Tensor& x, double dropout_rate = 0.0, CounterRng* rng = nullptr) const;
  void collect(const std::string& prefix, ParamList& out);
  Linear& last() { return layers_.back(); }
  const std::vector<Linear>& layers() const { return layers_; }

 private:
  std::vector<Linear> layers_;
};

}  // namespace rdhp::nn
