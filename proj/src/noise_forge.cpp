#include "rdhp/noise_forge.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "rdhp/errors.hpp"
#include "rdhp/rng.hpp"

namespace rdhp {

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "none") return NoiseKind::none;
  if (name == "uniform") return NoiseKind::uniform;
  if (name == "flip") return NoiseKind::flip;
  if (name == "flip2") return NoiseKind::flip2;
  throw ConfigError("unknown noise kind '" + name + "' (expected none|uniform|flip|flip2)");
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::flip: return "flip";
    case NoiseKind::flip2: return "flip2";
  }
  return "none";
}

void NoiseSpec::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("noise p must lie in [0, 1]");
  if (!(time_p >= 0.0 && time_p <= 1.0)) throw ConfigError("time_p must lie in [0, 1]");
  if (!(time_sigma >= 0.0)) throw ConfigError("time_sigma must be >= 0");
}

CorruptionMatrix build_matrix(NoiseKind kind, std::uint32_t num_types, double p, std::uint64_t seed) {
  const std::size_t k = num_types;
  if (k < 2 && kind != NoiseKind::none) throw ConfigError("label noise needs at least 2 types");
  if (kind == NoiseKind::flip2 && k < 3) throw ConfigError("flip2 noise needs at least 3 types");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("noise p must lie in [0, 1]");

  CorruptionMatrix m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) m[i][i] = 1.0;
  if (kind == NoiseKind::none || p == 0.0) return m;

  CounterRng rng(seed, 0xF11D);
  for (std::size_t i = 0; i < k; ++i) m[i][i] = 1.0 - p;
  switch (kind) {
    case NoiseKind::uniform:
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          if (i != j) m[i][j] = p / static_cast<double>(k - 1);
      break;
    case NoiseKind::flip: {
      std::vector<std::size_t> perm(k);
      bool deranged = false;
      while (!deranged) {
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = k - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        deranged = true;
        for (std::size_t i = 0; i < k; ++i) deranged = deranged && perm[i] != i;
      }
      for (std::size_t i = 0; i < k; ++i) m[i][perm[i]] = p;
      break;
    }
    case NoiseKind::flip2:
      for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < k; ++j)
          if (j != i) others.push_back(j);
        const std::size_t a = rng.below(others.size());
        std::size_t b = rng.below(others.size() - 1);
        if (b >= a) ++b;
        m[i][others[a]] = p / 2.0;
        m[i][others[b]] = p / 2.0;
      }
      break;
    case NoiseKind::none:
      break;
  }
  return m;
}

namespace {

Mark draw_from_row(const std::vector<double>& row, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (u < acc) return static_cast<Mark>(j);
  }
  // u landed in the rounding slack above the row sum; take the last
  // non-zero entry.
  for (std::size_t j = row.size(); j-- > 0;)
    if (row[j] > 0.0) return static_cast<Mark>(j);
  return 0;
}

struct SequenceOutcome {
  EventSequence seq;
  std::vector<AlteredEvent> altered;
  std::size_t marks_changed = 0;
  std::size_t times_changed = 0;
  std::size_t clamps = 0;
};

SequenceOutcome corrupt_sequence(const EventSequence& in, const CorruptionMatrix& matrix,
                                 const NoiseSpec& spec, double t_max, CounterRng rng) {
  SequenceOutcome out;
  out.seq.id = in.id;
  out.seq.events.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Event& e = in.events[i];
    Event noisy = e;
    // Fixed draw budget per event: one uniform for the mark, one for the
    // time coin, two for the Gaussian.
    const double u_mark = rng.uniform();
    const double u_time = rng.uniform();
    const double g = rng.normal(0.0, 1.0);
    noisy.mark = draw_from_row(matrix[e.mark], u_mark);
    AlteredEvent rec{i, e.time, e.mark, noisy.mark != e.mark, false, false};
    if (u_time < spec.time_p && spec.time_sigma > 0.0) {
      double t = e.time + spec.time_sigma * g;
      if (t < 0.0 || t > t_max) {
        t = std::clamp(t, 0.0, t_max);
        rec.clamped = true;
        ++out.clamps;
      }
      noisy.time = t;
      rec.time_changed = true;
      ++out.times_changed;
    }
    if (rec.mark_changed) ++out.marks_changed;
    if (rec.mark_changed || rec.time_changed) out.altered.push_back(rec);
    out.seq.events.push_back(noisy);
  }
  if (out.times_changed > 0) sort_events(out.seq);
  return out;
}

}  // namespace

CorruptionResult corrupt(const Dataset& dataset, const NoiseSpec& spec, Execution exec) {
  spec.validate();
  CorruptionResult result;
  result.log.spec = spec;
  result.log.matrix = build_matrix(spec.kind, dataset.num_types, spec.p, spec.seed);

  std::vector<SequenceOutcome> outcomes(dataset.size());
  const CounterRng root(spec.seed, 0xC0FFEE);
  for_each_index(exec, dataset.size(), [&](std::size_t i) {
    outcomes[i] = corrupt_sequence(dataset.sequences[i], result.log.matrix, spec, dataset.t_max,
                                   root.derive(i));
  });

  result.noisy.num_types = dataset.num_types;
  result.noisy.t_max = dataset.t_max;
  result.noisy.sequences.reserve(dataset.size());
  for (auto& o : outcomes) {
    result.log.events_seen += o.seq.size();
    result.log.marks_changed += o.marks_changed;
    result.log.times_changed += o.times_changed;
    result.log.clamps += o.clamps;
    if (!o.altered.empty()) result.log.altered[o.seq.id] = std::move(o.altered);
    result.noisy.sequences.push_back(std::move(o.seq));
  }
  result.noisy.max_gap = largest_gap(result.noisy);
  return result;
}

std::string CorruptionLog::to_json() const {
  using nlohmann::json;
  json seqs = json::object();
  for (const auto& [id, list] : altered) {
    json arr = json::array();
    for (const auto& a : list) {
      arr.push_back({a.index, a.original_time, a.original_mark});
    }
    seqs[id] = std::move(arr);
  }
  json flags = json::object();
  for (const auto& [id, list] : altered) {
    json arr = json::array();
    for (const auto& a : list) {
      std::string f;
      if (a.mark_changed) f += 'm';
      if (a.time_changed) f += 't';
      if (a.clamped) f += 'c';
      arr.push_back(f);
    }
    flags[id] = std::move(arr);
  }
  json j = {
      {"altered", std::move(seqs)},
      {"flags", std::move(flags)},
      {"matrix", matrix},
      {"spec",
       {{"kind", to_string(spec.kind)},
        {"p", spec.p},
        {"time_p", spec.time_p},
        {"time_sigma", spec.time_sigma},
        {"seed", spec.seed}}},
      {"events_seen", events_seen},
      {"marks_changed", marks_changed},
      {"times_changed", times_changed},
      {"clamps", clamps},
  };
  return j.dump(1);
}

}  // namespace rdhp
