#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdhp/tpp_core.hpp"

namespace rdhp {

class RdhpModel;

/// Rows are true marks, columns predicted marks.
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;

  explicit ConfusionMatrix(std::size_t num_types = 0)
      : counts(num_types, std::vector<std::size_t>(num_types, 0)) {}
  std::size_t num_types() const { return counts.size(); }
  std::size_t total() const;
  /// Per-class F1; a class with no true and no predicted instances scores 0.
  std::vector<double> per_class_f1() const;
};

ConfusionMatrix confusion(const std::vector<Mark>& preds, const std::vector<Mark>& truths, std::size_t num_types);

/// Unweighted mean of per-class F1 over the num_types declared classes.
double macro_f1(const std::vector<Mark>& preds, const std::vector<Mark>& truths, std::size_t num_types);
/// As above with num_types = 1 + the largest mark seen.
double macro_f1(const std::vector<Mark>& preds, const std::vector<Mark>& truths);

double rmse(const std::vector<double>& preds, const std::vector<double>& truths);

/// Flattened (mu, alpha, gamma) intensity-head outputs of one model over every
/// position of a probe dataset.
struct IntensityTrace {
  std::string probe_hash;
  std::vector<double> values;

  nlohmann::json to_json() const;
  static IntensityTrace from_json(const nlohmann::json& j);
};

IntensityTrace trace_intensity(RdhpModel& model, const Dataset& probe);

enum class DivergenceMetric { mean_abs, mean_squared };

/// Mean absolute (or squared) difference of two traces over one probe set.
double intensity_divergence(const IntensityTrace& a, const IntensityTrace& b,
                            DivergenceMetric metric = DivergenceMetric::mean_abs);

struct CompoundingReport {
  double d_time = 0.0;
  double d_label = 0.0;
  double d_both = 0.0;
  /// d_both / (d_time + d_label); NaN when the denominator is zero.
  double ratio = 0.0;
  DivergenceMetric metric = DivergenceMetric::mean_abs;

  bool both_exceeds_max() const { return d_both > std::max(d_time, d_label); }
  bool both_exceeds_sum() const { return d_both > d_time + d_label; }
  nlohmann::json to_json() const;
};

CompoundingReport compounding_report(const IntensityTrace& clean, const IntensityTrace& time_noise,
                                     const IntensityTrace& label_noise, const IntensityTrace& both_noise,
                                     DivergenceMetric metric = DivergenceMetric::mean_abs);

}  // namespace rdhp
