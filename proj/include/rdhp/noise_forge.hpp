#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rdhp/hawkes_sim.hpp"
#include "rdhp/parallel.hpp"
#include "rdhp/tpp_core.hpp"

namespace rdhp {

enum class NoiseKind { none, uniform, flip, flip2 };

NoiseKind parse_noise_kind(const std::string& name);
std::string to_string(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  /// Label corruption probability (off-diagonal mass of each matrix row).
  double p = 0.0;
  /// Probability that a timestamp is perturbed; drawn independently of the mark.
  double time_p = 0.0;
  double time_sigma = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Row-stochastic K x K matrix; entry [i][j] = P(recorded j | true i).
using CorruptionMatrix = Matrix;

/// uniform: p/(K-1) everywhere off the diagonal.
/// flip: a seeded derangement picks one partner per row, which gets p.
/// flip2: two distinct seeded partners per row, p/2 each (needs K >= 3).
/// p = 0 yields the identity for every kind.
CorruptionMatrix build_matrix(NoiseKind kind, std::uint32_t num_types, double p, std::uint64_t seed);

struct AlteredEvent {
  /// Position of the event in the original (uncorrupted) sequence.
  std::size_t index = 0;
  double original_time = 0.0;
  Mark original_mark = 0;
  bool mark_changed = false;
  bool time_changed = false;
  bool clamped = false;
  friend bool operator==(const AlteredEvent&, const AlteredEvent&) = default;
};

struct CorruptionLog {
  NoiseSpec spec;
  CorruptionMatrix matrix;
  std::map<std::string, std::vector<AlteredEvent>> altered;
  std::size_t events_seen = 0;
  std::size_t marks_changed = 0;
  std::size_t times_changed = 0;
  std::size_t clamps = 0;

  bool empty() const noexcept { return altered.empty(); }
  std::string to_json() const;
};

struct CorruptionResult {
  Dataset noisy;
  CorruptionLog log;
};

/// Each event independently: mark resampled from its matrix row; with
/// probability time_p the time becomes t + N(0, time_sigma) clamped to
/// [0, t_max]. Corrupted sequences are re-sorted. Sequence i draws from
/// stream i of spec.seed. The output header carries max_gap of the noisy
/// data for gap normalisation.
CorruptionResult corrupt(const Dataset& dataset, const NoiseSpec& spec,
                         Execution exec = Execution::parallel);

}  // namespace rdhp
