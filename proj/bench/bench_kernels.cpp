// Wall-clock comparison of the OpenMP kernels against their serial
// references. Every pair is also checked for identical output.
//
//   rdhp_bench [--sequences N] [--reps R]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>

#include "rdhp/checkpoint.hpp"
#include "rdhp/hawkes_sim.hpp"
#include "rdhp/noise_forge.hpp"
#include "rdhp/pipeline.hpp"
#include "rdhp/trainer.hpp"

using namespace rdhp;

namespace {

double time_best(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-18s serial %9.4f s   parallel %9.4f s   speedup %5.2fx   %s\n", name, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 400;
  int reps = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--sequences") == 0) n = std::strtoull(argv[i + 1], nullptr, 10);
    if (std::strcmp(argv[i], "--reps") == 0) reps = std::atoi(argv[i + 1]);
  }
  std::printf("threads: %d, sequences: %zu, best of %d\n", omp_get_max_threads(), n, reps);
  bool all_same = true;

  const HawkesParams params = cyclic_hawkes();
  SimulatedDataset s_ser, s_par;
  const double sim_s = time_best(reps, [&] { s_ser = simulate_dataset(params, n, 12.0, 7, Execution::serial); });
  const double sim_p = time_best(reps, [&] { s_par = simulate_dataset(params, n, 12.0, 7, Execution::parallel); });
  report("simulate_dataset", sim_s, sim_p, s_ser.dataset == s_par.dataset);
  all_same &= s_ser.dataset == s_par.dataset;
  const Dataset& data = s_ser.dataset;

  NoiseSpec noise;
  noise.kind = NoiseKind::uniform;
  noise.p = 0.3;
  noise.time_p = 0.3;
  noise.time_sigma = 0.8;
  noise.seed = 11;
  CorruptionResult c_ser, c_par;
  const double cor_s = time_best(reps, [&] { c_ser = corrupt(data, noise, Execution::serial); });
  const double cor_p = time_best(reps, [&] { c_par = corrupt(data, noise, Execution::parallel); });
  report("corrupt", cor_s, cor_p, c_ser.noisy == c_par.noisy);
  all_same &= c_ser.noisy == c_par.noisy;

  TrainConfig cfg;
  cfg.model.num_types = data.num_types;
  cfg.epochs = 1;
  cfg.seed = 3;
  Dataset clean = data;
  clean.sequences.resize(std::min<std::size_t>(32, data.size()));
  std::string w_ser, w_par;
  auto one_epoch = [&](bool parallel, std::string& out) {
    TrainConfig c = cfg;
    c.parallel = parallel;
    auto st = TrainState::create(c, c_ser.noisy);
    train_epoch(*st, c_ser.noisy, clean);
    out = checkpoint::encode(st->model.parameters()).dump();
  };
  const double tr_s = time_best(1, [&] { one_epoch(false, w_ser); });
  const double tr_p = time_best(1, [&] { one_epoch(true, w_par); });
  report("train_epoch", tr_s, tr_p, w_ser == w_par);
  all_same &= w_ser == w_par;

  auto st = TrainState::create(cfg, c_ser.noisy);
  const Predictor pred = predictor_of(*st);
  Predictions p_ser, p_par;
  const double pr_s = time_best(reps, [&] { p_ser = predict_dataset(pred, data, Execution::serial); });
  const double pr_p = time_best(reps, [&] { p_par = predict_dataset(pred, data, Execution::parallel); });
  const bool same_pred = p_ser.pred_marks == p_par.pred_marks && p_ser.pred_gaps == p_par.pred_gaps;
  report("predict_dataset", pr_s, pr_p, same_pred);
  all_same &= same_pred;

  return all_same ? 0 : 1;
}
