#pragma once

#include <vector>

#include "json.hpp"
#include "rdhp/nn.hpp"

namespace rdhp::optim {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled decay: x -= lr * weight_decay * x after each step.
  double weight_decay = 0.0;
};

/// Adaptive-moment optimiser with bias correction over one parameter group.
/// Parameters without a populated grad are left untouched by step().
class Adam {
 public:
  Adam() = default;
  Adam(nn::ParamList params, AdamConfig config);

  void step();
  void zero_grad();

  /// Points the optimiser at a different (structurally identical) list,
  /// keeping its moments. Used after a module has been copied.
  void rebind(nn::ParamList params);

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::size_t steps() const { return t_; }
  const nn::ParamList& params() const { return params_; }

  nlohmann::json state() const;
  void load_state(const nlohmann::json& j);

 private:
  nn::ParamList params_;
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Scales grads so their global L2 norm is at most max_norm. Returns the norm
/// before clipping.
double clip_grad_norm(const nn::ParamList& params, double max_norm);

}  // namespace rdhp::optim
