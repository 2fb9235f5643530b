#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rdhp/errors.hpp"
#include "rdhp/robust_losses.hpp"

using namespace rdhp;
namespace T = rdhp::ad;

namespace {

// Logits whose softmax puts probability q on class 0 of K.
T::Tensor logits_for(double q, std::size_t k = 4) {
  std::vector<double> l(k, 0.0);
  l[0] = std::log(q * static_cast<double>(k - 1) / (1.0 - q));
  return T::Tensor::matrix(1, k, l);
}

}  // namespace

TEST_CASE("GCE at near-certain target is about zero") {
  CHECK(gce_value(1.0 - 1e-12, 0.7) < 1e-11);
  CHECK(gce_loss(logits_for(1.0 - 1e-12), {0}, 0.7).item() < 1e-9);
}

TEST_CASE("GCE with beta = 1 is the MAE form 1 - q") {
  CHECK(gce_value(0.25, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(gce_loss(logits_for(0.25), {0}, 1.0).item() == doctest::Approx(0.75).epsilon(1e-12));
  for (double q = 0.05; q < 1.0; q += 0.1) CHECK(gce_value(q, 1.0) == doctest::Approx(1.0 - q).epsilon(1e-15));
}

TEST_CASE("GCE with beta = 0.7 at q = 0.5") {
  const double expect = (1.0 - std::pow(0.5, 0.7)) / 0.7;
  CHECK(gce_value(0.5, 0.7) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(gce_value(0.5, 0.7) == doctest::Approx(0.549).epsilon(1e-3));
  CHECK(gce_loss(logits_for(0.5), {0}, 0.7).item() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("GCE beta out of range is a configuration error") {
  CHECK_THROWS_AS(gce_value(0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(gce_value(0.5, 1.5), ConfigError);
  CHECK_THROWS_AS(gce_loss(logits_for(0.5), {0}, -0.1), ConfigError);
}

TEST_CASE("GCE approaches cross-entropy monotonically as beta shrinks") {
  double prev = 1e300;
  for (double beta : {0.5, 0.1, 0.01, 0.001}) {
    double worst = 0.0;
    for (int i = 1; i <= 9; ++i) {
      const double q = i / 10.0;
      worst = std::max(worst, std::abs(gce_value(q, beta) + std::log(q)));
    }
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("GCE gradient with respect to q is q^(beta - 1)") {
  for (double beta : {1.0, 0.7, 0.3})
    for (double q : {0.1, 0.5, 0.9}) {
      auto qt = T::Tensor::scalar(q, true);
      // (1 - exp(beta log q)) / beta, built the same way as gce_loss
      T::scale(T::sub(T::Tensor::scalar(1.0), T::exp(T::scale(T::log(qt), beta))), 1.0 / beta).backward();
      CHECK(-qt.grad()[0] == doctest::Approx(std::pow(q, beta - 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("CCE is minus log q") {
  CHECK(cce_loss(logits_for(0.3), {0}).item() == doctest::Approx(-std::log(0.3)).epsilon(1e-12));
}

TEST_CASE("GCE and CCE gradients match finite differences") {
  CounterRng r(4);
  std::vector<double> d(5 * 4);
  for (double& x : d) x = r.normal(0, 2);
  auto logits = T::Tensor::matrix(5, 4, d, true);
  const std::vector<std::size_t> targets{0, 3, 1, 1, 2};
  CHECK(oracle::finite_difference_check([&] { return T::sum(gce_loss(logits, targets, 0.7)); }, {&logits}).failed == 0);
  CHECK(oracle::finite_difference_check([&] { return T::sum(cce_loss(logits, targets)); }, {&logits}).failed == 0);
}

TEST_CASE("over-parameter values") {
  CHECK(over_param_value(0, 0, 0.3) == 0.0);
  CHECK(over_param_value(1, 0, 0.5) == 0.5);
  CHECK(over_param_value(0, 1, 0.0) == -1.0);
  CounterRng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = over_param_value(2 * r.uniform() - 1, 2 * r.uniform() - 1, r.uniform());
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("time loss values and gradients") {
  auto pred = T::Tensor::vector({0.2}, true);
  auto m = T::Tensor::vector({0.5}, true), n = T::Tensor::vector({0.3}, true);
  const auto t = T::Tensor::vector({0.5});
  CHECK(time_loss(T::Tensor::vector({0.5}), T::Tensor::vector({0.0}), t).item() == 0.0);
  CHECK(time_loss(pred, T::Tensor::vector({0.1}), t).item() == doctest::Approx(0.2).epsilon(1e-15));
  // p = 0.25 * 0.5 - 0.09 * 0.5 = 0.08; residual 0.2 + 0.08 - 0.5 < 0
  const auto loss = time_loss(pred, over_param(m, n, t), t);
  loss.backward();
  CHECK(pred.grad()[0] == -1.0);
  CHECK(m.grad()[0] == doctest::Approx(-2 * 0.5 * 0.5));
  CHECK(n.grad()[0] == doctest::Approx(2 * 0.3 * 0.5));
  auto p2 = T::Tensor::vector({0.9}, true);
  time_loss(p2, T::Tensor(), t).backward();
  CHECK(p2.grad()[0] == 1.0);
}

TEST_CASE("over-parameters: init, lookup, projection and round trip") {
  Dataset d;
  d.num_types = 2;
  d.t_max = 5;
  d.sequences = {{"a", {{0.1, 0}, {0.2, 1}, {0.3, 0}}}, {"b", {{1.0, 1}}}, {"c", {{0.5, 0}, {0.7, 0}}}};
  OverParams p(d, 3);
  CHECK(p.size() == 3);
  CHECK(p.m("a").size() == 2);
  CHECK(p.m("b").empty());
  CHECK(p.max_abs() < 1e-6);
  CHECK(p.max_abs() > 0.0);
  p.m("a")[0] = 4.0;
  p.n("c")[0] = -2.5;
  p.project();
  CHECK(p.m("a")[0] == 1.0);
  CHECK(p.n("c")[0] == -1.0);
  CHECK(p.max_abs() <= 1.0);
  CHECK(OverParams::from_json(nlohmann::json::parse(p.to_json().dump())) == p);
  CHECK_THROWS_AS(p.m("zzz"), ContractError);
}

TEST_CASE("over-parameter init has mean 0 and std 1e-8") {
  Dataset d;
  d.num_types = 1;
  d.t_max = 1e6;
  EventSequence s{"long", {}};
  for (int i = 0; i < 20001; ++i) s.events.push_back({static_cast<double>(i), 0});
  d.sequences.push_back(s);
  OverParams p(d, 1);
  double sum = 0, sq = 0;
  for (double x : p.all_m()) {
    sum += x;
    sq += x * x;
  }
  const double n = static_cast<double>(p.size()), mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 4e-8 / std::sqrt(n));
  CHECK(std::abs(sd - 1e-8) < 2e-10);
}

TEST_CASE("reweight net with a zeroed output layer gives 0.5 everywhere") {
  ReweightNet net(64, 1);
  net.zero_output_layer();
  const auto w = net(T::Tensor::matrix(3, 2, {0.1, 0.2, 5.0, 0.0, 2.0, 9.0}));
  for (double v : w.data()) CHECK(v == 0.5);
}

TEST_CASE("reweight net is pointwise and bounded in (0, 1)") {
  ReweightNet net(64, 2);
  const auto w = net(T::Tensor::matrix(3, 2, {0.7, 0.2, 0.7, 0.2, 3.0, 0.01}));
  CHECK(w.at(0, 0) == w.at(1, 0));
  CHECK(w.at(0, 1) == w.at(1, 1));
  CounterRng r(8);
  std::vector<double> l(200 * 2);
  for (double& x : l) x = r.uniform() * 10.0;
  const auto many = net(T::Tensor::matrix(200, 2, l));
  for (double v : many.data()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK_THROWS_AS(net(T::Tensor::matrix(1, 3, {1, 2, 3})), ShapeError);
}

TEST_CASE("combined loss") {
  const auto lv = T::Tensor::vector({0.4, 1.0, 0.1}), lt = T::Tensor::vector({0.2, 0.3, 0.9});
  const auto ones = T::Tensor::full({3, 2}, 1.0);
  CHECK(combined_loss(lv, lt, ones).item() == doctest::Approx(1.5 / 3 + 1.4 / 3).epsilon(1e-15));
  auto lv2 = T::Tensor::vector({0.4, 1.0, 0.1}, true);
  const auto zero = combined_loss(lv2, lt, T::Tensor::zeros({3, 2}));
  CHECK(zero.item() == 0.0);
  zero.backward();
  for (double g : lv2.grad()) CHECK(g == 0.0);
  const auto one = combined_loss(T::Tensor::vector({0.4}), T::Tensor::vector({0.2}),
                                 T::Tensor::matrix(1, 2, {0.3, 0.6}));
  CHECK(one.item() == doctest::Approx(0.3 * 0.4 + 0.6 * 0.2).epsilon(1e-15));
  CHECK_THROWS_AS(combined_loss(lv, lt, T::Tensor::full({2, 2}, 1.0)), ContractError);
}
