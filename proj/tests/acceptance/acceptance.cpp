// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero when any of them fails.
//
//   rdhp_acceptance [--only N]... [--seeds S]
//
// All thresholds are fixed below; nothing is tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rdhp/checkpoint.hpp"
#include "rdhp/eval_metrics.hpp"
#include "rdhp/hawkes_sim.hpp"
#include "rdhp/manifest.hpp"
#include "rdhp/model.hpp"
#include "rdhp/noise_forge.hpp"
#include "rdhp/pipeline.hpp"
#include "rdhp/robust_losses.hpp"
#include "rdhp/trainer.hpp"

using namespace rdhp;
namespace T = rdhp::ad;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances -----------------------------------------------------
constexpr std::size_t kRandomGraphs = 120;
constexpr double kGradRel = 1e-3;
constexpr double kGradAbs = 1e-6;
constexpr double kGradSeconds = 60.0;

constexpr std::size_t kKsMinEvents = 10000;
constexpr double kKsAlpha = 0.01;
constexpr double kKsSeconds = 120.0;

constexpr double kMatrixTol = 1e-15;
constexpr std::size_t kNoiseEvents = 100000;
constexpr double kNoiseSe = 3.0;

constexpr double kF1Margin = 0.03;  // three F1 points
constexpr std::size_t kRobustSequences = 2000;
constexpr double kRobustTMax = 12.0;
constexpr double kMinMeanLength = 20.0;
constexpr std::size_t kRobustEpochs = 15;

constexpr std::size_t kCompoundSequences = 800;
constexpr std::size_t kCompoundEpochs = 8;
constexpr std::size_t kMinSeedsAgreeing = 4;
// -----------------------------------------------------------------------------

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t num_seeds = 5;

// ---- 1 ----------------------------------------------------------------------

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t graphs = 0, bad_graphs = 0, entries = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; graphs < kRandomGraphs; ++seed) {
    auto g = oracle::random_graph(seed);
    if (!g.valid) continue;
    ++graphs;
    std::vector<T::Tensor*> leaves;
    for (auto& l : g.leaves) leaves.push_back(&l);
    const auto r = oracle::finite_difference_check(g.loss, leaves, 1e-4, kGradRel, kGradAbs);
    bad_graphs += r.failed > 0;
    entries += r.checked;
    if (r.failed) worst = std::max(worst, r.max_rel);
  }

  ModelConfig mc;
  mc.num_types = 3;
  mc.embed_dim = 8;
  mc.attention_heads = 2;
  mc.attention_layers = 2;
  mc.mlp_layers = 2;
  mc.hidden_size = 6;
  mc.dropout = 0.0;
  RdhpModel model(mc, 11);
  const EventSequence s{"five", {{0.1, 0}, {0.4, 2}, {0.45, 1}, {1.2, 0}, {2.0, 2}}};
  std::vector<std::size_t> marks;
  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    marks.push_back(s.events[i + 1].mark);
    gaps.push_back(s.events[i + 1].time - s.events[i].time);
  }
  auto loss = [&] {
    const auto out = model.forward(s);
    const auto logits = T::slice(out.logits, 0, 0, s.size() - 1);
    const auto time = T::slice(out.time, 0, 0, s.size() - 1);
    return T::add(T::mean(gce_loss(logits, marks, 0.7)),
                  T::mean(time_loss(time, T::Tensor(), T::Tensor::vector(gaps))));
  };
  auto params = model.parameters();
  const auto mr = oracle::finite_difference_check(loss, nn::tensors_of(params), 1e-4, kGradRel, kGradAbs);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = bad_graphs == 0 && mr.failed == 0 && mr.checked == nn::count_scalars(params) && mr.max_grad > 1e-3 &&
           secs < kGradSeconds;
  o.detail = fmt("%zu graphs (%zu entries), %zu failing (worst rel %.1e); model %zu/%zu params failing, "
                 "max abs err %.1e, max |grad| %.2f; %.1f s",
                 graphs, entries, bad_graphs, worst, mr.failed, mr.checked, mr.max_abs, mr.max_grad, secs);
  return o;
}

// ---- 2 ----------------------------------------------------------------------

Outcome simulator() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Setting {
    const char* name;
    HawkesParams p;
  };
  const std::vector<Setting> settings{
      {"poisson", HawkesParams({0.8}, {{0.0}}, {{1.0}})},
      {"self", HawkesParams({0.5}, {{0.6}}, {{1.5}})},
      {"mutual", HawkesParams({0.3, 0.4}, {{0.2, 0.4}, {0.3, 0.1}}, {{1.2, 2.0}, {1.0, 1.5}})},
  };
  Outcome o{true, ""};
  for (const auto& st : settings) {
    std::vector<double> z;
    for (std::uint64_t seed = 1000; z.size() < kKsMinEvents; ++seed) {
      const auto seq = simulate(st.p, 200.0, seed).sequence;
      const auto r = rescaled_intervals(st.p, seq);
      z.insert(z.end(), r.begin(), r.end());
    }
    const double d = oracle::ks_statistic_exp1(z);
    const double pv = oracle::ks_pvalue(d, z.size());
    o.pass &= pv > kKsAlpha;
    o.detail += fmt("%s N=%zu D=%.4f p=%.3f; ", st.name, z.size(), d, pv);
  }
  const double secs = seconds_since(t0);
  o.pass &= secs < kKsSeconds;
  o.detail += fmt("%.1f s", secs);
  return o;
}

// ---- 3 ----------------------------------------------------------------------

Outcome noise_operators() {
  Outcome o{true, ""};
  const auto near = [](double a, double b) { return std::abs(a - b) <= kMatrixTol; };
  const auto u = build_matrix(NoiseKind::uniform, 4, 0.3, 1);
  const auto f = build_matrix(NoiseKind::flip, 4, 0.3, 1);
  const auto f2 = build_matrix(NoiseKind::flip2, 4, 0.3, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    int f_partner = 0, f2_partner = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) {
        o.pass &= near(u[i][j], 0.7) && near(f[i][j], 0.7) && near(f2[i][j], 0.7);
        continue;
      }
      o.pass &= near(u[i][j], 0.1);
      if (near(f[i][j], 0.3)) ++f_partner;
      else o.pass &= f[i][j] == 0.0;
      if (near(f2[i][j], 0.15)) ++f2_partner;
      else o.pass &= f2[i][j] == 0.0;
    }
    o.pass &= f_partner == 1 && f2_partner == 2;
  }
  o.detail = o.pass ? "matrices match; " : "matrix mismatch; ";

  Dataset d;
  d.num_types = 4;
  d.t_max = 10.0;
  for (std::size_t i = 0; i < kNoiseEvents; ++i)
    d.sequences.push_back({"e" + std::to_string(i), {{5.0, static_cast<Mark>(i % 4)}}});
  double worst_z = 0.0;
  for (auto kind : {NoiseKind::uniform, NoiseKind::flip, NoiseKind::flip2}) {
    NoiseSpec spec;
    spec.kind = kind;
    spec.p = 0.3;
    spec.seed = 17;
    const auto r = corrupt(d, spec);
    // transitions[i][j]: true i recorded as j
    std::vector<std::vector<double>> counts(4, std::vector<double>(4, 0.0));
    std::vector<double> totals(4, 0.0);
    for (std::size_t s = 0; s < r.noisy.size(); ++s) {
      const Mark truth = d.sequences[s].events[0].mark;
      counts[truth][r.noisy.sequences[s].events[0].mark] += 1.0;
      totals[truth] += 1.0;
    }
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const double p = r.log.matrix[i][j];
        if (p == 0.0) {
          o.pass &= counts[i][j] == 0.0;
          continue;
        }
        if (p == 1.0) continue;
        const double se = std::sqrt(p * (1.0 - p) / totals[i]);
        const double z = std::abs(counts[i][j] / totals[i] - p) / se;
        worst_z = std::max(worst_z, z);
        o.pass &= z <= kNoiseSe;
      }
  }
  o.detail += fmt("%zu events per kind, worst cell |z| = %.2f (limit %.0f)", kNoiseEvents, worst_z, kNoiseSe);
  return o;
}

// ---- 4 ----------------------------------------------------------------------

Outcome gce_limit() {
  std::vector<double> gaps;
  for (double beta : {0.5, 0.1, 0.01, 0.001}) {
    double worst = 0.0;
    for (int k = 1; k <= 9; ++k) {
      const double q = 0.1 * k;
      worst = std::max(worst, std::abs(gce_value(q, beta) + std::log(q)));
    }
    gaps.push_back(worst);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) monotone &= gaps[i] < gaps[i - 1];
  bool mae = true;
  for (int k = 1; k <= 9; ++k) mae &= gce_value(0.1 * k, 1.0) == 1.0 - 0.1 * k;
  return {monotone && mae, fmt("max gaps %.3e %.3e %.3e %.3e; beta=1 equals 1-q: %s", gaps[0], gaps[1], gaps[2],
                               gaps[3], mae ? "yes" : "no")};
}

// ---- 5, 7, 9 ----------------------------------------------------------------

TrainConfig desk_config() {
  TrainConfig c;
  c.model.num_types = 4;
  c.model.embed_dim = 16;
  c.model.attention_heads = 2;
  c.model.attention_layers = 1;
  c.model.mlp_layers = 2;
  c.model.hidden_size = 32;
  c.model.dropout = 0.1;
  c.lr = 5e-3;
  c.epochs = kRobustEpochs;
  return c;
}

NoiseSpec label_and_time_noise() {
  NoiseSpec n;
  n.kind = NoiseKind::uniform;
  n.p = 0.3;
  n.time_p = 0.3;
  n.time_sigma = 0.8;
  return n;
}

struct RobustRuns {
  std::vector<double> f1_rdhp, f1_base, f1_noreg;
  std::vector<double> rmse_rdhp, rmse_base, rmse_noreg;
  std::vector<std::vector<EpochMetrics>> histories;
  double mean_length = 0.0;
  bool done = false;
};
RobustRuns robust;

void run_robust() {
  if (robust.done) return;
  SyntheticSetup setup;
  setup.num_sequences = kRobustSequences;
  setup.t_max = kRobustTMax;
  for (std::uint64_t seed = 1; seed <= num_seeds; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = prepare_experiment(setup, SplitSpec{}, label_and_time_noise(), seed);
    robust.mean_length += static_cast<double>(data.noisy_train.num_events()) /
                          static_cast<double>(data.noisy_train.size()) / static_cast<double>(num_seeds);
    TrainConfig cfg = desk_config();
    cfg.seed = seed;
    TrainConfig noreg = cfg;
    noreg.use_overparam = false;
    const auto r = run_trial(cfg, data.noisy_train, data);
    const auto b = run_trial(cfg.non_robust(), data.noisy_train, data);
    const auto n = run_trial(noreg, data.noisy_train, data);
    robust.f1_rdhp.push_back(r.test.f1);
    robust.f1_base.push_back(b.test.f1);
    robust.f1_noreg.push_back(n.test.f1);
    robust.rmse_rdhp.push_back(r.test.rmse);
    robust.rmse_base.push_back(b.test.rmse);
    robust.rmse_noreg.push_back(n.test.rmse);
    robust.histories.push_back(r.history);
    std::printf("  seed %llu: rdhp f1 %.4f rmse %.4f | non-robust f1 %.4f rmse %.4f | no-reg f1 %.4f rmse %.4f (%.0f s)\n",
                static_cast<unsigned long long>(seed), r.test.f1, r.test.rmse, b.test.f1, b.test.rmse, n.test.f1,
                n.test.rmse, seconds_since(t0));
    std::fflush(stdout);
  }
  robust.done = true;
}

Outcome robustness() {
  run_robust();
  const double f1r = mean_std(robust.f1_rdhp).mean, f1b = mean_std(robust.f1_base).mean;
  const double rr = mean_std(robust.rmse_rdhp).mean, rb = mean_std(robust.rmse_base).mean;
  Outcome o;
  o.pass = robust.mean_length >= kMinMeanLength && f1r - f1b >= kF1Margin && rr < rb;
  o.detail = fmt("mean len %.1f; F1 rdhp %.4f vs non-robust %.4f (diff %+.4f, need >= %.2f); RMSE %.4f vs %.4f",
                 robust.mean_length, f1r, f1b, f1r - f1b, kF1Margin, rr, rb);
  return o;
}

Outcome ablation() {
  run_robust();
  const double rr = mean_std(robust.rmse_rdhp).mean, rn = mean_std(robust.rmse_noreg).mean;
  return {rr <= rn, fmt("RMSE rdhp %.4f vs without over-parameters %.4f (F1 %.4f vs %.4f)", rr, rn,
                        mean_std(robust.f1_rdhp).mean, mean_std(robust.f1_noreg).mean)};
}

Outcome equilibrium() {
  run_robust();
  std::size_t agree = 0;
  std::string per_seed;
  for (const auto& h : robust.histories) {
    std::vector<double> delta;
    for (std::size_t e = 1; e < h.size(); ++e)
      delta.push_back(0.5 * (std::abs(h[e].sigma_v - h[e - 1].sigma_v) + std::abs(h[e].sigma_t - h[e - 1].sigma_t)));
    const std::size_t q = std::max<std::size_t>(1, (delta.size() + 3) / 4);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      first += delta[i] / static_cast<double>(q);
      last += delta[delta.size() - 1 - i] / static_cast<double>(q);
    }
    agree += last < first;
    per_seed += fmt("%.2e->%.2e ", first, last);
  }
  return {agree >= std::min(kMinSeedsAgreeing, robust.histories.size()),
          fmt("%zu/%zu seeds settle; first->last quarter mean |dsigma|: %s", agree, robust.histories.size(),
              per_seed.c_str())};
}

// ---- 6 ----------------------------------------------------------------------

Outcome compounding() {
  SyntheticSetup setup;
  setup.num_sequences = kCompoundSequences;
  std::size_t agree = 0;
  std::string ratios;
  for (std::uint64_t seed = 1; seed <= num_seeds; ++seed) {
    NoiseSpec none;
    const auto data = prepare_experiment(setup, SplitSpec{}, none, seed);
    NoiseSpec time_only;
    time_only.time_p = 0.3;
    time_only.time_sigma = 0.8;
    NoiseSpec label_only;
    label_only.kind = NoiseKind::uniform;
    label_only.p = 0.3;
    const NoiseSpec both = label_and_time_noise();
    TrainConfig cfg = desk_config().non_robust();
    cfg.epochs = kCompoundEpochs;
    cfg.seed = seed;
    cfg.select_by = "last";
    auto trace = [&](const Dataset& train) {
      const auto r = run_trial(cfg, train, data);
      auto p = Predictor::from_json(r.model);
      return trace_intensity(p.model, data.test);
    };
    const auto clean = trace(data.clean_train);
    const auto rep = compounding_report(clean, trace(corrupt_train(data, time_only)),
                                        trace(corrupt_train(data, label_only)), trace(corrupt_train(data, both)));
    agree += rep.both_exceeds_max();
    ratios += fmt("%.3f(%s) ", rep.ratio, rep.both_exceeds_max() ? "y" : "n");
    std::printf("  seed %llu: D_time %.4e D_label %.4e D_both %.4e\n", static_cast<unsigned long long>(seed),
                rep.d_time, rep.d_label, rep.d_both);
    std::fflush(stdout);
  }
  return {agree >= std::min<std::size_t>(kMinSeedsAgreeing, num_seeds),
          fmt("D_both > max in %zu/%zu seeds; D_both/(D_time+D_label): %s", agree, num_seeds, ratios.c_str())};
}

// ---- 8 ----------------------------------------------------------------------

bool same_predictions(const Predictions& a, const Predictions& b) {
  return a.pred_marks == b.pred_marks && a.pred_gaps == b.pred_gaps;
}

Outcome inference_independence() {
  SyntheticSetup setup;
  setup.num_sequences = 200;
  const auto data = prepare_experiment(setup, SplitSpec{}, label_and_time_noise(), 9);
  TrainConfig cfg = desk_config();
  cfg.epochs = 2;
  cfg.seed = 9;
  oracle::TempDir dir("accept8");
  const auto fit_result = fit(cfg, data.noisy_train, data.clean, data.val, dir.path());
  const Predictor full = Predictor::load(dir.path());
  const auto with = predict_dataset(full, data.test);
  fs::remove(dir / "overparams.json");
  const auto stripped = predict_dataset(Predictor::load(dir.path()), data.test);
  auto& st = *fit_result.state;
  const auto live = predict_dataset(predictor_of(st), data.test);
  for (const auto& seq : data.noisy_train.sequences) {
    for (double& x : st.over.m(seq.id)) x = 0.77;
    for (double& x : st.over.n(seq.id)) x = -0.55;
  }
  const auto scrambled = predict_dataset(predictor_of(st), data.test);
  const bool pass = same_predictions(with, stripped) && same_predictions(live, scrambled);
  return {pass, fmt("%zu predictions, present vs stripped %s, live vs scrambled %s", with.pred_marks.size(),
                    same_predictions(with, stripped) ? "identical" : "DIFFER",
                    same_predictions(live, scrambled) ? "identical" : "DIFFER")};
}

// ---- 10 ---------------------------------------------------------------------

bool same_dir_bytes(const fs::path& a, const fs::path& b) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names.insert(e.path().filename().string());
  for (const auto& n : names) {
    if (!fs::exists(a / n) || !fs::exists(b / n)) return false;
    if (oracle::slurp(a / n) != oracle::slurp(b / n)) return false;
  }
  return true;
}

Outcome determinism(const std::string& cli) {
  oracle::TempDir dir("accept10");
  std::vector<std::string> failures;

  const auto sim = simulate_dataset(cyclic_hawkes(), 300, 12.0, 4).dataset;
  save_dataset(sim, dir / "a.jsonl");
  save_dataset(load_dataset(dir / "a.jsonl").dataset, dir / "b.jsonl");
  if (oracle::slurp(dir / "a.jsonl") != oracle::slurp(dir / "b.jsonl")) failures.push_back("dataset");
  if (serialize_dataset(parse_dataset(serialize_dataset(sim)).dataset) != serialize_dataset(sim))
    failures.push_back("dataset-text");

  SplitSpec spec;
  spec.seed = 12;
  const auto s1 = split(sim, spec), s2 = split(load_dataset(dir / "b.jsonl").dataset, spec);
  if (serialize_dataset(s1.train) != serialize_dataset(s2.train) ||
      serialize_dataset(s1.test) != serialize_dataset(s2.test) ||
      serialize_dataset(s1.val) != serialize_dataset(s2.val) ||
      serialize_dataset(s1.clean) != serialize_dataset(s2.clean))
    failures.push_back("split");

  TrainConfig cfg = desk_config();
  cfg.epochs = 1;
  cfg.seed = 5;
  auto st = TrainState::create(cfg, s1.train);
  train_epoch(*st, s1.train, s1.clean);
  st->save(dir / "ck1");
  TrainState::load(dir / "ck1")->save(dir / "ck2");
  if (!same_dir_bytes(dir / "ck1", dir / "ck2")) failures.push_back("checkpoint");

  // CLI pipeline recorded into one manifest, then replayed twice.
  const auto work = dir / "work";
  fs::create_directories(work);
  write_text(work / "cfg.json", R"({"epochs": 2, "model": {"embed_dim": 8, "attention_heads": 2,
    "attention_layers": 1, "mlp_layers": 1, "hidden_size": 8, "dropout": 0.1}})");
  const std::string in = "cd '" + work.string() + "' && " + cli + " ";
  const std::vector<std::string> steps{
      "simulate --n 200 --t-max 12 --seed 3 --out data.jsonl",
      "split --in data.jsonl --out-dir split --seed 3 --manifest manifest.json",
      "corrupt --in split/train.jsonl --out split/noisy.jsonl --kind uniform --p 0.3 --time-p 0.3 --seed 3 "
      "--manifest manifest.json",
      "train --config cfg.json --train split/noisy.jsonl --clean split/clean.jsonl --val split/val.jsonl "
      "--out ckpt --manifest manifest.json",
      "eval --ckpt ckpt --test split/test.jsonl --out metrics.json --manifest manifest.json",
  };
  for (const auto& step : steps) {
    const auto r = oracle::run(in + step);
    if (r.exit_code != 0) {
      failures.push_back("cli: " + step.substr(0, step.find(' ')));
      std::printf("%s\n", r.output.c_str());
      break;
    }
  }
  std::string replay_note;
  for (const char* name : {"replay1", "replay2"}) {
    const auto r =
        oracle::run(cli + " verify-manifest --manifest '" + (work / "manifest.json").string() + "' --replay-into '" +
                    (dir / name).string() + "'");
    if (r.exit_code != 0) {
      failures.push_back(std::string("replay ") + name);
      std::printf("%s\n", r.output.c_str());
    }
  }
  if (failures.empty()) {
    const auto m1 = oracle::slurp(dir / "replay1/metrics.json"), m2 = oracle::slurp(dir / "replay2/metrics.json");
    if (m1 != m2 || m1 != oracle::slurp(work / "metrics.json")) failures.push_back("metrics");
  }
  std::string detail = "dataset, split, checkpoint and two manifest replays";
  if (!failures.empty()) {
    detail = "unstable:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--only") == 0) only.insert(std::atoi(argv[i + 1]));
    if (std::strcmp(argv[i], "--seeds") == 0) num_seeds = std::strtoull(argv[i + 1], nullptr, 10);
  }
  const std::string cli = RDHP_CLI_PATH;

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient integrity", gradients},
      {2, "simulator fidelity", simulator},
      {3, "noise operator exactness", noise_operators},
      {4, "GCE limit behaviour", gce_limit},
      {5, "robustness ordering", robustness},
      {6, "compounding diagnostic", compounding},
      {7, "ablation ordering", ablation},
      {8, "inference independence", inference_independence},
      {9, "weight equilibrium", equilibrium},
      {10, "determinism and round trips", [&] { return determinism(cli); }},
  };

  int failed = 0;
  std::vector<std::string> lines;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    lines.push_back(fmt("%s  %2d %-28s %s [%.0f s]", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                        seconds_since(t0)));
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%d of %zu criteria failed\n", failed, lines.size());
  return failed == 0 ? 0 : 1;
}
