#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rdhp {

using Mark = std::uint32_t;

struct Event {
  double time = 0.0;
  Mark mark = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct EventSequence {
  std::string id;
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
  friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

/// A collection of sequences over K event types on the horizon [0, t_max].
///
/// max_gap, when present, is the normalisation constant for inter-event gaps
/// (written by the corruption stage and consumed by training).
struct Dataset {
  std::uint32_t num_types = 0;
  double t_max = 0.0;
  std::optional<double> max_gap;
  std::vector<EventSequence> sequences;

  std::size_t size() const noexcept { return sequences.size(); }
  bool empty() const noexcept { return sequences.empty(); }
  std::size_t num_events() const noexcept;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct LoadResult {
  Dataset dataset;
  /// Sequences whose events had to be re-sorted by time.
  std::size_t resorted = 0;
};

/// Sorts events by time (stable, so equal times keep file order).
/// Returns true when the order changed.
bool sort_events(EventSequence& seq);

/// Throws SchemaError when a mark is out of range, a time is negative or
/// beyond t_max, a sequence is empty or unsorted.
void validate(const Dataset& dataset);

/// Largest inter-event gap over all sequences (0 when there are none).
double largest_gap(const Dataset& dataset);

LoadResult parse_dataset(const std::string& text);
std::string serialize_dataset(const Dataset& dataset);

LoadResult load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct SplitSpec {
  double train_frac = 0.75;
  double val_frac = 0.10;
  double test_frac = 0.10;
  double clean_frac = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
  /// Held out from the training portion before any corruption.
  Dataset clean;
  std::vector<std::string> warnings;
};

/// Sequence-level partition. Counts are allocated by largest remainder so
/// they always sum to the input size; each split keeps input order.
SplitResult split(const Dataset& dataset, const SplitSpec& spec);

/// Split counts for n sequences (train, val, test, clean).
std::vector<std::size_t> split_counts(std::size_t n, const SplitSpec& spec);

}  // namespace rdhp
