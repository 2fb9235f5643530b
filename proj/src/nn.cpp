#include "rdhp/nn.hpp"

#include <cmath>

#include "rdhp/errors.hpp"

namespace rdhp::nn {

void detach_storage(const ParamList& params) {
  for (const auto& p : params) *p.tensor = p.tensor->clone_leaf();
}

void copy_values(const ParamList& from, const ParamList& to) {
  if (from.size() != to.size()) throw ContractError("copy_values: parameter lists differ in length");
  for (std::size_t i = 0; i < from.size(); ++i) {
    auto src = from[i].tensor->data();
    auto dst = to[i].tensor->mutable_data();
    if (src.size() != dst.size()) throw ShapeError("copy_values: size mismatch for " + from[i].name);
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

void zero_grads(const ParamList& params) {
  for (const auto& p : params) p.tensor->zero_grad();
}

std::vector<ad::Tensor*> tensors_of(const ParamList& params) {
  std::vector<ad::Tensor*> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

std::size_t count_scalars(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor->size();
  return n;
}

Linear::Linear(std::size_t in, std::size_t out, CounterRng& rng, bool with_bias) {
  // Glorot-uniform weights, zero bias.
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<double> w(in * out);
  for (double& x : w) x = (2.0 * rng.uniform() - 1.0) * bound;
  weight = ad::Tensor::matrix(in, out, std::move(w), true);
  if (with_bias) bias = ad::Tensor::zeros({out}, true);
}

ad::Tensor Linear::operator()(const ad::Tensor& x) const {
  ad::Tensor y = ad::matmul(x, weight);
  return bias.defined() ? ad::add(y, bias) : y;
}

void Linear::collect(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".weight", &weight});
  if (bias.defined()) out.push_back({prefix + ".bias", &bias});
}

void Linear::zero() {
  for (double& x : weight.mutable_data()) x = 0.0;
  if (bias.defined())
    for (double& x : bias.mutable_data()) x = 0.0;
}

LayerNorm::LayerNorm(std::size_t features)
    : gain(ad::Tensor::full({features}, 1.0, true)), shift(ad::Tensor::zeros({features}, true)) {}

ad::Tensor LayerNorm::operator()(const ad::Tensor& x) const {
  return ad::add(ad::mul(ad::layer_norm(x), gain), shift);
}

void LayerNorm::collect(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".gain", &gain});
  out.push_back({prefix + ".shift", &shift});
}

Mlp::Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t layers, CounterRng& rng) {
  if (layers == 0) throw ConfigError("an MLP needs at least one layer");
  std::size_t width = in;
  for (std::size_t i = 0; i + 1 < layers; ++i) {
    layers_.emplace_back(width, hidden, rng);
    width = hidden;
  }
  layers_.emplace_back(width, out, rng);
}

ad::Tensor Mlp::operator()(const ad::Tensor& x, double dropout_rate, CounterRng* rng) const {
  ad::Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](h);
    if (i + 1 < layers_.size()) {
      h = ad::gelu(h);
      if (rng && dropout_rate > 0.0) h = ad::dropout(h, dropout_rate, *rng);
    }
  }
  return h;
}

void Mlp::collect(const std::string& prefix, ParamList& out) {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect(prefix + "." + std::to_string(i), out);
}

}  // namespace rdhp::nn
