#include "rdhp/optim.hpp"

#include <cmath>

#include "rdhp/errors.hpp"

namespace rdhp::optim {

Adam::Adam(nn::ParamList params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor->size(), 0.0);
    v_.emplace_back(p.tensor->size(), 0.0);
  }
}

void Adam::rebind(nn::ParamList params) {
  if (params.size() != params_.size()) throw ContractError("Adam::rebind: parameter count changed");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].tensor->size() != m_[i].size()) throw ShapeError("Adam::rebind: size changed for " + params[i].name);
  params_ = std::move(params);
}

void Adam::step() {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Tensor& p = *params_[i].tensor;
    const auto g = p.grad();
    if (g.empty()) continue;
    auto x = p.mutable_data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < x.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double mh = m[j] / c1;
      const double vh = v[j] / c2;
      x[j] -= config_.lr * (mh / (std::sqrt(vh) + config_.eps) + config_.weight_decay * x[j]);
    }
  }
}

void Adam::zero_grad() { nn::zero_grads(params_); }

nlohmann::json Adam::state() const {
  nlohmann::json j;
  j["t"] = t_;
  j["lr"] = config_.lr;
  nlohmann::json moments = nlohmann::json::object();
  for (std::size_t i = 0; i < params_.size(); ++i) moments[params_[i].name] = {{"m", m_[i]}, {"v", v_[i]}};
  j["moments"] = std::move(moments);
  return j;
}

void Adam::load_state(const nlohmann::json& j) {
  t_ = j.at("t").get<std::size_t>();
  config_.lr = j.at("lr").get<double>();
  const auto& moments = j.at("moments");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& e = moments.at(params_[i].name);
    auto m = e.at("m").get<std::vector<double>>();
    auto v = e.at("v").get<std::vector<double>>();
    if (m.size() != m_[i].size() || v.size() != v_[i].size())
      throw ShapeError("optimizer state size mismatch for " + params_[i].name);
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
}

double clip_grad_norm(const nn::ParamList& params, double max_norm) {
  const double norm = ad::grad_norm(nn::tensors_of(params));
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (const auto& p : params) {
      auto& g = p.tensor->node()->grad;
      for (double& x : g) x *= s;
    }
  }
  return norm;
}

}  // namespace rdhp::optim
