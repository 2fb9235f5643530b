#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rdhp/errors.hpp"
#include "rdhp/pipeline.hpp"

using namespace rdhp;

namespace {

nlohmann::json tiny_grid() {
  return nlohmann::json::parse(R"({
    "setup": {"num_sequences": 40, "t_max": 6},
    "split": {"train": 0.6, "val": 0.15, "test": 0.15, "clean": 0.1},
    "train": {"epochs": 1, "batch_size": 8, "lr": 0.005,
              "model": {"num_types": 4, "embed_dim": 4, "attention_heads": 1, "attention_layers": 1,
                        "mlp_layers": 1, "hidden_size": 4, "dropout": 0.0}},
    "variants": {"rdhp": {}, "base": {"use_gce": false, "use_overparam": false, "use_reweight": false}},
    "noise": [{"kind": "none", "p": 0.0}, {"kind": "uniform", "p": 0.2, "time_p": 0.2},
              {"kind": "uniform", "p": 0.4}],
    "seeds": [1, 2]
  })");
}

}  // namespace

TEST_CASE("hawkes params JSON round trip") {
  const auto p = cyclic_hawkes(3);
  const auto back = hawkes_from_json(hawkes_to_json(p));
  CHECK(back.mu() == p.mu());
  CHECK(back.alpha() == p.alpha());
  CHECK(back.gamma() == p.gamma());
  CHECK_THROWS_AS(hawkes_from_json(nlohmann::json{{"mu", {1.0}}}), ConfigError);
}

TEST_CASE("experiment preparation keeps val, test and clean uncorrupted") {
  NoiseSpec ns;
  ns.kind = NoiseKind::uniform;
  ns.p = 0.3;
  ns.time_p = 0.3;
  SyntheticSetup setup;
  setup.num_sequences = 60;
  const auto d = prepare_experiment(setup, SplitSpec{}, ns, 5);
  CHECK(d.noisy_train.size() == d.clean_train.size());
  std::set<std::string> altered;
  for (const auto& [id, list] : d.log.altered) altered.insert(id);
  for (const Dataset* ds : {&d.val, &d.test, &d.clean})
    for (const auto& s : ds->sequences) CHECK(altered.count(s.id) == 0);
  CHECK_FALSE(altered.empty());
  const auto again = prepare_experiment(setup, SplitSpec{}, ns, 5);
  CHECK(again.noisy_train == d.noisy_train);
  CHECK(again.test == d.test);
}

TEST_CASE("mean and sample standard deviation") {
  CHECK(mean_std({3.0}).std == 0.0);
  const auto ms = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == 2.5);
  CHECK(ms.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("grid parsing is strict") {
  auto j = tiny_grid();
  const auto g = SweepGrid::from_json(j);
  CHECK(g.num_runs() == 2 * 3 * 2);
  CHECK(sweep_runs(g).size() == 12);
  j["extra"] = 1;
  CHECK_THROWS_AS(SweepGrid::from_json(j), ConfigError);
  j = tiny_grid();
  j["variants"]["bad"] = {{"nonsense", 1}};
  CHECK_THROWS_AS(SweepGrid::from_json(j), ConfigError);
}

TEST_CASE("one cell with one seed gives one row with zero std") {
  auto j = tiny_grid();
  j["variants"] = {{"base", {{"use_gce", false}, {"use_overparam", false}, {"use_reweight", false}}}};
  j["noise"] = nlohmann::json::array({{{"kind", "uniform"}, {"p", 0.2}}});
  j["seeds"] = {3};
  const auto g = SweepGrid::from_json(j);
  std::vector<std::pair<double, double>> res;
  for (const auto& r : sweep_runs(g)) res.push_back(execute_run(g, r, Execution::serial));
  const auto cells = aggregate(g, res);
  REQUIRE(cells.size() == 1);
  const std::string csv = sweep_csv(cells);
  std::istringstream in(csv);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK_FALSE(std::getline(in, extra));
  CHECK(header == "variant,noise,p,time_p,runs,f1_mean,f1_std,rmse_mean,rmse_std,flag");
  CHECK(row.find(",1,") != std::string::npos);
  CHECK(mean_std(cells[0].f1).std == 0.0);
}

TEST_CASE("three noise levels by five seeds aggregate into three rows of five") {
  auto j = tiny_grid();
  j["variants"] = {{"base", {{"use_gce", false}, {"use_overparam", false}, {"use_reweight", false}}}};
  j["seeds"] = {1, 2, 3, 4, 5};
  const auto g = SweepGrid::from_json(j);
  std::vector<std::pair<double, double>> fake;
  for (std::size_t i = 0; i < g.num_runs(); ++i) fake.push_back({0.1 * static_cast<double>(i % 5), 1.0});
  const auto cells = aggregate(g, fake);
  REQUIRE(cells.size() == 3);
  for (const auto& c : cells) CHECK(c.f1.size() == 5);
}

TEST_CASE("non-monotone degradation is flagged but not fatal") {
  SweepCell clean{"base", NoiseKind::none, 0.0, 0.0, {0.30, 0.32}, {1, 1}};
  SweepCell noisy{"base", NoiseKind::uniform, 0.3, 0.0, {0.40, 0.42}, {1, 1}};
  const std::string csv = sweep_csv({clean, noisy});
  CHECK(csv.find("degraded_f1_not_monotone") != std::string::npos);
  SweepCell fine{"base", NoiseKind::uniform, 0.3, 0.0, {0.20, 0.22}, {1, 1}};
  CHECK(sweep_csv({clean, fine}).find("degraded_f1_not_monotone") == std::string::npos);
}
