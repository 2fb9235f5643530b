#include "rdhp/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rdhp/errors.hpp"
#include "rdhp/manifest.hpp"
#include "rdhp/model.hpp"

namespace rdhp {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts)
    for (std::size_t c : row) n += c;
  return n;
}

std::vector<double> ConfusionMatrix::per_class_f1() const {
  const std::size_t k = num_types();
  std::vector<double> f1(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = counts[c][c], actual = 0, predicted = 0;
    for (std::size_t j = 0; j < k; ++j) {
      actual += counts[c][j];
      predicted += counts[j][c];
    }
    // 2TP / (2TP + FP + FN) equals 2PR / (P + R) and is 0 when TP is 0.
    const std::size_t denom = actual + predicted;
    f1[c] = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return f1;
}

ConfusionMatrix confusion(const std::vector<Mark>& preds, const std::vector<Mark>& truths, std::size_t num_types) {
  if (preds.size() != truths.size())
    throw ContractError("macro_f1: " + std::to_string(preds.size()) + " predictions vs " +
                        std::to_string(truths.size()) + " truths");
  if (preds.empty()) throw ContractError("macro_f1: no predictions");
  ConfusionMatrix cm(num_types);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= num_types || truths[i] >= num_types) throw DomainError("macro_f1: mark out of range");
    ++cm.counts[truths[i]][preds[i]];
  }
  return cm;
}

double macro_f1(const std::vector<Mark>& preds, const std::vector<Mark>& truths, std::size_t num_types) {
  const auto f1 = confusion(preds, truths, num_types).per_class_f1();
  double s = 0.0;
  for (double x : f1) s += x;
  return s / static_cast<double>(num_types);
}

double macro_f1(const std::vector<Mark>& preds, const std::vector<Mark>& truths) {
  Mark mx = 0;
  for (Mark m : preds) mx = std::max(mx, m);
  for (Mark m : truths) mx = std::max(mx, m);
  return macro_f1(preds, truths, static_cast<std::size_t>(mx) + 1);
}

double rmse(const std::vector<double>& preds, const std::vector<double>& truths) {
  if (preds.size() != truths.size())
    throw ContractError("rmse: " + std::to_string(preds.size()) + " predictions vs " +
                        std::to_string(truths.size()) + " truths");
  if (preds.empty()) throw ContractError("rmse: no predictions");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - truths[i]) * (preds[i] - truths[i]);
  return std::sqrt(s / static_cast<double>(preds.size()));
}

nlohmann::json IntensityTrace::to_json() const { return {{"probe_hash", probe_hash}, {"values", values}}; }

IntensityTrace IntensityTrace::from_json(const nlohmann::json& j) {
  return {j.at("probe_hash").get<std::string>(), j.at("values").get<std::vector<double>>()};
}

IntensityTrace trace_intensity(RdhpModel& model, const Dataset& probe) {
  IntensityTrace trace;
  trace.probe_hash = fnv1a_hex(serialize_dataset(probe));
  for (const auto& seq : probe.sequences) {
    if (seq.empty()) continue;
    const auto out = model.forward(seq);
    for (const ad::Tensor* t : {&out.head.mu, &out.head.alpha, &out.head.gamma})
      trace.values.insert(trace.values.end(), t->data().begin(), t->data().end());
  }
  return trace;
}

double intensity_divergence(const IntensityTrace& a, const IntensityTrace& b, DivergenceMetric metric) {
  if (a.probe_hash != b.probe_hash) throw ContractError("intensity traces were taken on different probe sets");
  if (a.values.size() != b.values.size()) throw ContractError("intensity traces differ in length");
  if (a.values.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += metric == DivergenceMetric::mean_abs ? std::abs(d) : d * d;
  }
  return s / static_cast<double>(a.values.size());
}

nlohmann::json CompoundingReport::to_json() const {
  nlohmann::json j = {
      {"d_time", d_time},
      {"d_label", d_label},
      {"d_both", d_both},
      {"both_exceeds_max", both_exceeds_max()},
      {"both_exceeds_sum", both_exceeds_sum()},
      {"metric", metric == DivergenceMetric::mean_abs ? "mean_abs" : "mean_squared"},
      {"statistic", "difference of flattened (mu, alpha, gamma) intensity-head outputs on the probe set"},
  };
  j["ratio"] = std::isnan(ratio) ? nlohmann::json(nullptr) : nlohmann::json(ratio);
  return j;
}

CompoundingReport compounding_report(const IntensityTrace& clean, const IntensityTrace& time_noise,
                                     const IntensityTrace& label_noise, const IntensityTrace& both_noise,
                                     DivergenceMetric metric) {
  CompoundingReport r;
  r.metric = metric;
  r.d_time = intensity_divergence(clean, time_noise, metric);
  r.d_label = intensity_divergence(clean, label_noise, metric);
  r.d_both = intensity_divergence(clean, both_noise, metric);
  const double denom = r.d_time + r.d_label;
  r.ratio = denom > 0.0 ? r.d_both / denom : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace rdhp
