#include "rdhp/robust_losses.hpp"

#include <algorithm>
#include <cmath>

#include "rdhp/errors.hpp"
#include "rdhp/rng.hpp"

namespace rdhp {

void GceConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("GCE beta must lie in (0, 1]");
}

double gce_value(double q, double beta) {
  GceConfig{beta}.validate();
  return (1.0 - std::pow(q, beta)) / beta;
}

ad::Tensor gce_loss(const ad::Tensor& logits, const std::vector<std::size_t>& targets, double beta) {
  GceConfig{beta}.validate();
  ad::Tensor log_q = ad::pick(ad::log_softmax(logits), targets);
  return ad::scale(1.0 - ad::exp(ad::scale(log_q, beta)), 1.0 / beta);
}

ad::Tensor cce_loss(const ad::Tensor& logits, const std::vector<std::size_t>& targets) {
  return ad::neg(ad::pick(ad::log_softmax(logits), targets));
}

double over_param_value(double m, double n, double t) { return m * m * t - n * n * (1.0 - t); }

ad::Tensor over_param(const ad::Tensor& m, const ad::Tensor& n, const ad::Tensor& target) {
  return ad::sub(ad::mul(ad::mul(m, m), target), ad::mul(ad::mul(n, n), 1.0 - target));
}

ad::Tensor time_loss(const ad::Tensor& prediction, const ad::Tensor& p, const ad::Tensor& target) {
  ad::Tensor r = p.defined() ? ad::add(prediction, p) : prediction;
  return ad::abs(ad::sub(r, target));
}

OverParams::OverParams(const Dataset& train, std::uint64_t seed, double init_std) {
  CounterRng rng(seed, 0x0E7A);
  for (const auto& seq : train.sequences) {
    const std::size_t count = seq.size() > 0 ? seq.size() - 1 : 0;
    if (offset_.count(seq.id)) throw SchemaError("duplicate sequence id '" + seq.id + "'");
    offset_[seq.id] = {m_.size(), count};
    order_.push_back(seq.id);
    for (std::size_t i = 0; i < count; ++i) {
      m_.push_back(rng.normal(0.0, init_std));
      n_.push_back(rng.normal(0.0, init_std));
    }
  }
}

namespace {
const std::pair<std::size_t, std::size_t>& lookup(
    const std::unordered_map<std::string, std::pair<std::size_t, std::size_t>>& offsets, const std::string& id) {
  auto it = offsets.find(id);
  if (it == offsets.end()) throw ContractError("no over-parameters for sequence '" + id + "'");
  return it->second;
}
}  // namespace

std::span<double> OverParams::m(const std::string& id) {
  const auto& [off, cnt] = lookup(offset_, id);
  return {m_.data() + off, cnt};
}
std::span<double> OverParams::n(const std::string& id) {
  const auto& [off, cnt] = lookup(offset_, id);
  return {n_.data() + off, cnt};
}
std::span<const double> OverParams::m(const std::string& id) const {
  const auto& [off, cnt] = lookup(offset_, id);
  return {m_.data() + off, cnt};
}
std::span<const double> OverParams::n(const std::string& id) const {
  const auto& [off, cnt] = lookup(offset_, id);
  return {n_.data() + off, cnt};
}

void OverParams::project() {
  for (double& x : m_) x = std::clamp(x, -1.0, 1.0);
  for (double& x : n_) x = std::clamp(x, -1.0, 1.0);
}

double OverParams::max_abs() const {
  double mx = 0.0;
  for (double x : m_) mx = std::max(mx, std::abs(x));
  for (double x : n_) mx = std::max(mx, std::abs(x));
  return mx;
}

nlohmann::json OverParams::to_json() const {
  nlohmann::json seqs = nlohmann::json::object();
  for (const auto& id : order_) {
    seqs[id] = {{"m", std::vector<double>(m(id).begin(), m(id).end())},
                {"n", std::vector<double>(n(id).begin(), n(id).end())}};
  }
  return {{"version", 1}, {"order", order_}, {"sequences", std::move(seqs)}};
}

OverParams OverParams::from_json(const nlohmann::json& j) {
  OverParams p;
  if (j.value("version", 0) != 1) throw SchemaError("unsupported over-parameter file version");
  const auto& seqs = j.at("sequences");
  for (const auto& id : j.at("order").get<std::vector<std::string>>()) {
    auto m = seqs.at(id).at("m").get<std::vector<double>>();
    auto n = seqs.at(id).at("n").get<std::vector<double>>();
    if (m.size() != n.size()) throw SchemaError("over-parameter m/n length mismatch for '" + id + "'");
    p.offset_[id] = {p.m_.size(), m.size()};
    p.order_.push_back(id);
    p.m_.insert(p.m_.end(), m.begin(), m.end());
    p.n_.insert(p.n_.end(), n.begin(), n.end());
  }
  return p;
}

ReweightNet::ReweightNet(std::size_t hidden, std::uint64_t seed) {
  CounterRng rng(seed, 0x3E16);
  hidden_ = nn::Linear(2, hidden, rng);
  output_ = nn::Linear(hidden, 2, rng);
}

ReweightNet ReweightNet::clone() const {
  ReweightNet copy = *this;
  nn::detach_storage(copy.parameters());
  return copy;
}

ad::Tensor ReweightNet::operator()(const ad::Tensor& losses) const {
  if (losses.rank() != 2 || losses.dim(1) != 2)
    throw ShapeError("reweight net expects (N x 2) losses, got " + ad::to_string(losses.shape()));
  return ad::sigmoid(output_(ad::gelu(hidden_(losses))));
}

void ReweightNet::zero_output_layer() { output_.zero(); }

nn::ParamList ReweightNet::parameters() {
  nn::ParamList out;
  hidden_.collect("reweight.hidden", out);
  output_.collect("reweight.output", out);
  return out;
}

ad::Tensor combined_loss(const ad::Tensor& loss_v, const ad::Tensor& loss_t, const ad::Tensor& weights) {
  const std::size_t n = loss_v.size();
  if (loss_t.size() != n || weights.rank() != 2 || weights.dim(0) != n || weights.dim(1) != 2)
    throw ContractError("combined_loss: weights " + ad::to_string(weights.shape()) + " do not align with " +
                        std::to_string(n) + " / " + std::to_string(loss_t.size()) + " losses");
  if (n == 0) throw ContractError("combined_loss: empty batch");
  ad::Tensor sv = ad::reshape(ad::slice(weights, 1, 0, 1), {n});
  ad::Tensor st = ad::reshape(ad::slice(weights, 1, 1, 2), {n});
  return ad::mean(ad::add(ad::mul(sv, loss_v), ad::mul(st, loss_t)));
}

}  // namespace rdhp
