// rdhp: command-line front end for the simulate -> split -> corrupt -> train
// -> eval -> diagnose pipeline. Stages communicate through files only; each
// invocation appends a record (argv, seeds, file hashes) to a manifest.

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rdhp/checkpoint.hpp"
#include "rdhp/errors.hpp"
#include "rdhp/eval_metrics.hpp"
#include "rdhp/hawkes_sim.hpp"
#include "rdhp/manifest.hpp"
#include "rdhp/noise_forge.hpp"
#include "rdhp/pipeline.hpp"
#include "rdhp/tpp_core.hpp"
#include "rdhp/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rdhp;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Invocation {
  Invocation() = default;
  explicit Invocation(std::string cmd) : command(std::move(cmd)) {}
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw InputError("input file not found: " + path);
}

void make_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void make_parent(const std::string& path) { make_dir(fs::path(path).parent_path()); }

Dataset load_input(const std::string& path) {
  require_file(path);
  LoadResult r = load_dataset(path);
  if (r.resorted > 0)
    std::cerr << "warning: " << path << ": re-sorted " << r.resorted << " sequence(s) by time\n";
  return std::move(r.dataset);
}

json load_json_file(const std::string& path) {
  require_file(path);
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw MalformedInputError(1, path + ": " + e.what());
  }
}

void record(const Invocation& inv, const std::string& manifest_path) {
  if (manifest_path.empty()) return;
  const fs::path mpath = fs::absolute(manifest_path);
  ExperimentManifest m = ExperimentManifest::load_or_empty(mpath);
  m.tool_version = kVersion;
  ManifestEntry e;
  e.command = inv.command;
  e.cwd = fs::relative(fs::current_path(), mpath.parent_path()).lexically_normal().string();
  if (e.cwd.empty()) e.cwd = ".";
  e.argv = inv.argv;
  e.seed = inv.seed;
  e.config_hash = inv.config_hash;
  for (const auto& p : inv.inputs) e.inputs[p] = hash_file(p);
  for (const auto& p : inv.outputs) e.outputs[p] = hash_file(p);
  m.entries.push_back(std::move(e));
  m.save(mpath);
}

std::string default_manifest(const std::string& output) {
  const fs::path p(output);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  return (dir / "manifest.json").string();
}

// ---------------------------------------------------------------------------
// Subcommand handlers

struct SimulateArgs {
  std::string params;
  std::vector<double> mu, alpha, gamma;
  std::size_t n = 2000;
  double t_max = 12.0;
  std::uint64_t seed = 0;
  std::string out;
  bool serial = false;
};

Invocation run_simulate(const SimulateArgs& a) {
  Invocation inv{"simulate"};
  make_parent(a.out);
  HawkesParams params = cyclic_hawkes();
  if (!a.params.empty()) {
    params = hawkes_from_json(load_json_file(a.params));
    inv.inputs.push_back(a.params);
  } else if (!a.mu.empty()) {
    const std::size_t k = a.mu.size();
    // alpha and gamma are row-major K x K; a single gamma value is broadcast.
    std::vector<double> g = a.gamma.empty() ? std::vector<double>{1.0} : a.gamma;
    if (g.size() == 1) g.assign(k * k, g[0]);
    std::vector<double> al = a.alpha.empty() ? std::vector<double>(k * k, 0.0) : a.alpha;
    if (al.size() != k * k || g.size() != k * k)
      throw ConfigError("--alpha and --gamma need K*K = " + std::to_string(k * k) + " values");
    Matrix am(k), gm(k);
    for (std::size_t o = 0; o < k; ++o) {
      am[o].assign(al.begin() + o * k, al.begin() + (o + 1) * k);
      gm[o].assign(g.begin() + o * k, g.begin() + (o + 1) * k);
    }
    params = HawkesParams(a.mu, std::move(am), std::move(gm));
  }
  if (!params.stable())
    std::cerr << "warning: branching ratio " << params.branching_ratio() << " >= 1, sequences are capped\n";
  SimulatedDataset sim =
      simulate_dataset(params, a.n, a.t_max, a.seed, a.serial ? Execution::serial : Execution::parallel);
  if (sim.truncated > 0) std::cerr << "warning: " << sim.truncated << " sequence(s) hit the event cap\n";
  if (sim.dropped_empty > 0) std::cerr << "note: dropped " << sim.dropped_empty << " empty realisation(s)\n";
  save_dataset(sim.dataset, a.out);
  std::cerr << "simulate: " << sim.dataset.size() << " sequences, " << sim.dataset.num_events() << " events -> "
            << a.out << "\n";
  inv.seed = a.seed;
  inv.outputs.push_back(a.out);
  return inv;
}

struct SplitArgs {
  std::string in;
  std::string out_dir;
  SplitSpec spec;
};

Invocation run_split(const SplitArgs& a) {
  Invocation inv{"split"};
  const Dataset d = load_input(a.in);
  SplitResult r = split(d, a.spec);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  const fs::path dir(a.out_dir);
  make_dir(dir);
  const std::vector<std::pair<std::string, const Dataset*>> parts = {
      {"train.jsonl", &r.train}, {"val.jsonl", &r.val}, {"test.jsonl", &r.test}, {"clean.jsonl", &r.clean}};
  for (const auto& [name, ds] : parts) {
    save_dataset(*ds, dir / name);
    inv.outputs.push_back((dir / name).string());
  }
  std::cerr << "split: train " << r.train.size() << ", val " << r.val.size() << ", test " << r.test.size()
            << ", clean " << r.clean.size() << "\n";
  inv.seed = a.spec.seed;
  inv.inputs.push_back(a.in);
  return inv;
}

struct CorruptArgs {
  std::string in;
  std::string out;
  std::string log;
  std::string kind = "uniform";
  NoiseSpec spec;
  bool serial = false;
};

Invocation run_corrupt(CorruptArgs a) {
  Invocation inv{"corrupt"};
  make_parent(a.out);
  const Dataset d = load_input(a.in);
  a.spec.kind = a.spec.p == 0.0 && a.kind == "none" ? NoiseKind::none : parse_noise_kind(a.kind);
  a.spec.validate();
  CorruptionResult r = corrupt(d, a.spec, a.serial ? Execution::serial : Execution::parallel);
  save_dataset(r.noisy, a.out);
  inv.outputs.push_back(a.out);
  const std::string log = a.log.empty() ? a.out + ".log.json" : a.log;
  write_text(log, r.log.to_json() + "\n");
  inv.outputs.push_back(log);
  std::cerr << "corrupt: " << r.log.marks_changed << " mark(s) and " << r.log.times_changed << " time(s) changed of "
            << r.log.events_seen << " events\n";
  inv.seed = a.spec.seed;
  inv.inputs.push_back(a.in);
  return inv;
}

struct TrainArgs {
  std::string config;
  std::string train;
  std::string clean;
  std::string val;
  std::string out;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool serial = false;
};

Invocation run_train(const TrainArgs& a) {
  Invocation inv{"train"};
  json cj = json::object();
  if (!a.config.empty()) {
    cj = load_json_file(a.config);
    inv.inputs.push_back(a.config);
  }
  TrainConfig cfg = TrainConfig::from_json(cj);
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  if (a.serial) cfg.parallel = false;
  const Dataset train = load_input(a.train);
  Dataset clean, val;
  if (!a.clean.empty()) {
    clean = load_input(a.clean);
    inv.inputs.push_back(a.clean);
  }
  if (!a.val.empty()) {
    val = load_input(a.val);
    inv.inputs.push_back(a.val);
  }
  if (cfg.model.num_types != train.num_types) {
    std::cerr << "note: model.num_types set to " << train.num_types << " from the training data\n";
    cfg.model.num_types = train.num_types;
  }
  inv.inputs.push_back(a.train);
  inv.seed = cfg.seed;
  inv.config_hash = fnv1a_hex(cfg.to_json().dump());

  FitResult fr = fit(cfg, train, clean, val, a.out);
  for (const auto& h : fr.history) {
    std::fprintf(stderr, "epoch %3zu  loss_v %.4f  loss_t %.4f  sigma_v %.4f  sigma_t %.4f  val_f1 %.4f  val_rmse %.4f",
                 h.epoch, h.loss_v, h.loss_t, h.sigma_v, h.sigma_t, h.val_f1, h.val_rmse);
    if (h.clipped > 0) std::fprintf(stderr, "  clipped %zu/%zu", h.clipped, h.batches);
    std::fprintf(stderr, "\n");
  }
  std::cerr << "train: kept epoch " << fr.best_epoch << " -> " << a.out << "\n";
  const fs::path out(a.out);
  for (const char* f : {"model.json", "overparams.json", "history.csv", "last/model.json", "last/overparams.json",
                        "last/state.json"})
    inv.outputs.push_back((out / f).string());
  return inv;
}

struct EvalArgs {
  std::string ckpt;
  std::string test;
  std::string out;
  bool serial = false;
};

Invocation run_eval(const EvalArgs& a) {
  Invocation inv{"eval"};
  make_parent(a.out);
  const fs::path model = fs::is_directory(a.ckpt) ? fs::path(a.ckpt) / "model.json" : fs::path(a.ckpt);
  require_file(model.string());
  const Predictor pred = Predictor::load(model);
  const Dataset test = load_input(a.test);
  const EvalResult r = evaluate(pred, test, a.serial ? Execution::serial : Execution::parallel);
  json j = r.to_json();
  j["checkpoint_hash"] = hash_file(model);
  j["test_hash"] = hash_file(a.test);
  write_text(a.out, j.dump(2) + "\n");
  std::fprintf(stderr, "eval: macro_f1 %.4f  rmse %.4f  (%zu samples)\n", r.f1, r.rmse, r.samples);
  inv.inputs = {model.string(), a.test};
  inv.outputs.push_back(a.out);
  return inv;
}

struct DiagnoseArgs {
  std::string clean, time, label, both, probe, out;
  std::string metric = "mean_abs";
};

Invocation run_diagnose(const DiagnoseArgs& a) {
  Invocation inv{"diagnose"};
  make_parent(a.out);
  const Dataset probe = load_input(a.probe);
  auto trace = [&](const std::string& ckpt) {
    const fs::path model = fs::is_directory(ckpt) ? fs::path(ckpt) / "model.json" : fs::path(ckpt);
    require_file(model.string());
    inv.inputs.push_back(model.string());
    Predictor p = Predictor::load(model);
    return trace_intensity(p.model, probe);
  };
  const DivergenceMetric metric =
      a.metric == "mean_squared" ? DivergenceMetric::mean_squared : DivergenceMetric::mean_abs;
  const CompoundingReport r = compounding_report(trace(a.clean), trace(a.time), trace(a.label), trace(a.both), metric);
  json j = r.to_json();
  j["probe_hash"] = fnv1a_hex(serialize_dataset(probe));
  write_text(a.out, j.dump(2) + "\n");
  std::fprintf(stderr, "diagnose: D_time %.6g  D_label %.6g  D_both %.6g  ratio %.4g\n", r.d_time, r.d_label,
               r.d_both, r.ratio);
  inv.inputs.push_back(a.probe);
  inv.outputs.push_back(a.out);
  return inv;
}

struct SweepArgs {
  std::string grid;
  std::string out;
  int jobs = 1;
};

/// Runs every grid cell, forking up to `jobs` worker processes. Each worker is
/// single-threaded and reports "f1 rmse" on a pipe.
std::vector<std::pair<double, double>> run_sweep_workers(const SweepGrid& grid, int jobs) {
  const auto runs = sweep_runs(grid);
  std::vector<std::pair<double, double>> results(runs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      results[i] = execute_run(grid, runs[i], Execution::serial);
      std::fprintf(stderr, "sweep: run %zu/%zu f1 %.4f rmse %.4f\n", i + 1, runs.size(), results[i].first,
                   results[i].second);
    }
    return results;
  }
  std::map<pid_t, std::pair<std::size_t, int>> active;  // pid -> (run, read fd)
  std::size_t next = 0, done = 0;
  auto reap_one = [&] {
    int status = 0;
    const pid_t pid = ::wait(&status);
    if (pid < 0) throw Error(std::string("wait failed: ") + std::strerror(errno));
    auto it = active.find(pid);
    if (it == active.end()) return;
    const auto [run, fd] = it->second;
    active.erase(it);
    char buf[256] = {0};
    const ssize_t n = ::read(fd, buf, sizeof buf - 1);
    ::close(fd);
    double f1 = 0, rm = 0;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0 || n <= 0 || std::sscanf(buf, "%lf %lf", &f1, &rm) != 2)
      throw Error("sweep worker for run " + std::to_string(run) + " failed");
    results[run] = {f1, rm};
    ++done;
    std::fprintf(stderr, "sweep: run %zu/%zu f1 %.4f rmse %.4f\n", done, runs.size(), f1, rm);
  };
  while (done < runs.size()) {
    while (next < runs.size() && static_cast<int>(active.size()) < jobs) {
      int fds[2];
      if (::pipe(fds) != 0) throw Error("pipe failed");
      std::fflush(nullptr);
      const pid_t pid = ::fork();
      if (pid < 0) throw Error("fork failed");
      if (pid == 0) {
        ::close(fds[0]);
        int code = 0;
        try {
          const auto r = execute_run(grid, runs[next], Execution::serial);
          char buf[128];
          const int len = std::snprintf(buf, sizeof buf, "%.17g %.17g\n", r.first, r.second);
          if (::write(fds[1], buf, static_cast<std::size_t>(len)) != len) code = 1;
        } catch (const std::exception& e) {
          std::fprintf(stderr, "sweep worker: %s\n", e.what());
          code = 1;
        }
        ::close(fds[1]);
        ::_exit(code);
      }
      ::close(fds[1]);
      active[pid] = {next, fds[0]};
      ++next;
    }
    reap_one();
  }
  return results;
}

Invocation run_sweep(const SweepArgs& a) {
  Invocation inv{"sweep"};
  make_parent(a.out);
  const SweepGrid grid = SweepGrid::from_json(load_json_file(a.grid));
  const auto results = run_sweep_workers(grid, a.jobs);
  const std::string csv = sweep_csv(aggregate(grid, results));
  write_text(a.out, csv);
  std::cout << csv;
  inv.inputs.push_back(a.grid);
  inv.outputs.push_back(a.out);
  inv.config_hash = hash_file(a.grid);
  return inv;
}

}  // namespace

// ---------------------------------------------------------------------------

int run_cli(std::vector<std::string> args);

namespace {

struct VerifyArgs {
  std::string manifest;
  std::string replay_into;
};

int run_verify(const VerifyArgs& a) {
  require_file(a.manifest);
  const fs::path mpath = fs::absolute(a.manifest);
  const ExperimentManifest m = ExperimentManifest::from_json(load_json_file(a.manifest));
  fs::path base = mpath.parent_path();
  if (!a.replay_into.empty()) {
    const fs::path target = fs::absolute(a.replay_into);
    fs::create_directories(target);
    for (const auto& rel : m.external_inputs()) {
      const fs::path src = base / rel, dst = target / rel;
      if (!fs::exists(src)) throw InputError("manifest input not found: " + src.string());
      if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
    }
    const fs::path saved = fs::current_path();
    for (const auto& e : m.entries) {
      const fs::path cwd = target / e.cwd;
      fs::create_directories(cwd);
      fs::current_path(cwd);
      std::vector<std::string> argv = e.argv;
      argv.push_back("--no-manifest");
      const int code = run_cli(argv);
      fs::current_path(saved);
      if (code != 0) {
        std::cerr << "verify-manifest: replay of '" << e.command << "' failed with exit code " << code << "\n";
        return 1;
      }
    }
    base = target;
  }
  const auto bad = check_outputs(m, base);
  for (const auto& b : bad)
    std::cerr << "mismatch: " << b.path << " (entry " << b.entry << "): expected " << b.expected << ", got "
              << (b.actual.empty() ? "<missing>" : b.actual) << "\n";
  std::cerr << "verify-manifest: " << m.entries.size() << " entries, " << bad.size() << " mismatch(es)\n";
  return bad.empty() ? 0 : 1;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Robust deep Hawkes process toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string manifest;
  bool no_manifest = false;

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a multivariate Hawkes dataset by thinning");
  c_sim->add_option("--params", sim.params, "Hawkes params JSON {mu, alpha, gamma}; default: 4-type cyclic process");
  c_sim->add_option("--mu", sim.mu, "Base rates, one per type (alternative to --params)")->delimiter(',');
  c_sim->add_option("--alpha", sim.alpha, "Excitation matrix, row-major K*K")->delimiter(',');
  c_sim->add_option("--gamma", sim.gamma, "Decay matrix, row-major K*K, or one value")->delimiter(',');
  c_sim->add_option("--n-seqs,--n", sim.n, "Number of sequences")->capture_default_str();
  c_sim->add_option("--t-max", sim.t_max, "Observation horizon")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  c_sim->add_option("--out", sim.out, "Output dataset (.jsonl)")->required();
  c_sim->add_flag("--serial", sim.serial, "Use the serial reference kernel");

  SplitArgs sp;
  auto* c_split = app.add_subcommand("split", "Partition a dataset into train/val/test/clean by sequence");
  c_split->add_option("--in", sp.in, "Input dataset")->required();
  c_split->add_option("--out-dir", sp.out_dir, "Directory for train/val/test/clean.jsonl")->required();
  c_split->add_option("--seed", sp.spec.seed, "Shuffle seed")->capture_default_str();
  c_split->add_option("--train", sp.spec.train_frac, "Train fraction (clean is carved out of it)")->capture_default_str();
  c_split->add_option("--val", sp.spec.val_frac, "Validation fraction")->capture_default_str();
  c_split->add_option("--test", sp.spec.test_frac, "Test fraction")->capture_default_str();
  c_split->add_option("--clean", sp.spec.clean_frac, "Clean-subset fraction")->capture_default_str();

  CorruptArgs co;
  auto* c_cor = app.add_subcommand("corrupt", "Inject label noise into marks and times");
  c_cor->add_option("--in", co.in, "Input dataset")->required();
  c_cor->add_option("--out", co.out, "Noisy dataset")->required();
  c_cor->add_option("--log", co.log, "Corruption log JSON (default: <out>.log.json)");
  c_cor->add_option("--kind", co.kind, "none | uniform | flip | flip2")->capture_default_str();
  c_cor->add_option("--p", co.spec.p, "Mark corruption probability")->capture_default_str();
  c_cor->add_option("--time-p", co.spec.time_p, "Time perturbation probability")->capture_default_str();
  c_cor->add_option("--time-sigma", co.spec.time_sigma, "Std of the Gaussian time perturbation")->capture_default_str();
  c_cor->add_option("--seed", co.spec.seed, "Random seed")->capture_default_str();
  c_cor->add_flag("--serial", co.serial, "Use the serial reference kernel");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model; writes model.json, overparams.json, history.csv");
  c_train->add_option("--config", tr.config, "Train config JSON (fields of TrainConfig)");
  c_train->add_option("--train", tr.train, "Noisy training set")->required();
  c_train->add_option("--clean", tr.clean, "Clean subset for the reweight net");
  c_train->add_option("--val", tr.val, "Validation set");
  c_train->add_option("--out", tr.out, "Checkpoint directory")->required();
  c_train->add_option("--epochs", tr.epochs, "Override config epochs");
  c_train->add_option("--seed", tr.seed, "Override config seed");
  c_train->add_flag("--serial", tr.serial, "Use the serial reference kernel");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Macro F1 and RMSE of a checkpoint on a dataset");
  c_eval->add_option("--ckpt", ev.ckpt, "Checkpoint directory or model.json")->required();
  c_eval->add_option("--test", ev.test, "Evaluation dataset")->required();
  c_eval->add_option("--out", ev.out, "metrics.json")->required();
  c_eval->add_flag("--serial", ev.serial, "Use the serial reference kernel");

  DiagnoseArgs dg;
  auto* c_diag = app.add_subcommand("diagnose", "Intensity divergence of noisy-trained models from a clean one");
  c_diag->add_option("--clean-ckpt", dg.clean, "Model trained on clean data")->required();
  c_diag->add_option("--time-ckpt", dg.time, "Model trained with time noise only")->required();
  c_diag->add_option("--label-ckpt", dg.label, "Model trained with mark noise only")->required();
  c_diag->add_option("--both-ckpt", dg.both, "Model trained with both kinds of noise")->required();
  c_diag->add_option("--probe", dg.probe, "Probe dataset")->required();
  c_diag->add_option("--out", dg.out, "compounding.json")->required();
  c_diag->add_option("--metric", dg.metric, "mean_abs | mean_squared")
      ->check(CLI::IsMember({"mean_abs", "mean_squared"}))
      ->capture_default_str();

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "Run a (variant x noise x seed) grid and aggregate mean/std");
  c_sweep->add_option("--grid", sw.grid, "Grid JSON")->required();
  c_sweep->add_option("--out", sw.out, "Results CSV")->required();
  c_sweep->add_option("--jobs", sw.jobs, "Parallel worker processes")->capture_default_str();

  VerifyArgs vf;
  auto* c_verify = app.add_subcommand("verify-manifest", "Check recorded output hashes, optionally after a replay");
  c_verify->add_option("--manifest", vf.manifest, "Manifest JSON")->required();
  c_verify->add_option("--replay-into", vf.replay_into, "Re-run every entry inside this directory first");

  for (auto* c : {c_sim, c_split, c_cor, c_train, c_eval, c_diag, c_sweep}) {
    c->add_option("--manifest", manifest, "Manifest to append to (default: manifest.json next to the output)");
    c->add_flag("--no-manifest", no_manifest, "Do not record this invocation");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_verify->parsed()) return run_verify(vf);
    Invocation inv;
    std::string primary;
    if (c_sim->parsed()) {
      inv = run_simulate(sim);
      primary = sim.out;
    } else if (c_split->parsed()) {
      inv = run_split(sp);
      primary = (fs::path(sp.out_dir) / "train.jsonl").string();
    } else if (c_cor->parsed()) {
      inv = run_corrupt(co);
      primary = co.out;
    } else if (c_train->parsed()) {
      inv = run_train(tr);
      primary = (fs::path(tr.out) / "model.json").string();
    } else if (c_eval->parsed()) {
      inv = run_eval(ev);
      primary = ev.out;
    } else if (c_diag->parsed()) {
      inv = run_diagnose(dg);
      primary = dg.out;
    } else if (c_sweep->parsed()) {
      inv = run_sweep(sw);
      primary = sw.out;
    }
    // argv without the manifest flags, so a replay can choose its own.
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--no-manifest") continue;
      if (args[i] == "--manifest") {
        ++i;
        continue;
      }
      if (args[i].rfind("--manifest=", 0) == 0) continue;
      inv.argv.push_back(args[i]);
    }
    if (!no_manifest) record(inv, manifest.empty() ? default_manifest(primary) : manifest);
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\nbatch dump: " << e.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(std::move(args));
}
