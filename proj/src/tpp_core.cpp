#include "rdhp/tpp_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rdhp/errors.hpp"
#include "rdhp/rng.hpp"

namespace rdhp {

using nlohmann::json;

std::size_t Dataset::num_events() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

bool sort_events(EventSequence& seq) {
  const auto by_time = [](const Event& a, const Event& b) { return a.time < b.time; };
  if (std::is_sorted(seq.events.begin(), seq.events.end(), by_time)) return false;
  std::stable_sort(seq.events.begin(), seq.events.end(), by_time);
  return true;
}

void validate(const Dataset& dataset) {
  if (dataset.num_types == 0) throw SchemaError("num_types must be positive");
  if (!(dataset.t_max > 0.0) || !std::isfinite(dataset.t_max))
    throw SchemaError("t_max must be a positive finite number");
  for (const auto& seq : dataset.sequences) {
    if (seq.empty()) throw SchemaError("sequence '" + seq.id + "' has no events");
    double prev = 0.0;
    for (const auto& e : seq.events) {
      if (e.mark >= dataset.num_types)
        throw SchemaError("sequence '" + seq.id + "': mark " + std::to_string(e.mark) +
                          " >= num_types " + std::to_string(dataset.num_types));
      if (!(e.time >= 0.0) || e.time > dataset.t_max)
        throw SchemaError("sequence '" + seq.id + "': time outside [0, t_max]");
      if (e.time < prev) throw SchemaError("sequence '" + seq.id + "' is not sorted");
      prev = e.time;
    }
  }
}

double largest_gap(const Dataset& dataset) {
  double gap = 0.0;
  for (const auto& seq : dataset.sequences)
    for (std::size_t i = 1; i < seq.size(); ++i)
      gap = std::max(gap, seq.events[i].time - seq.events[i - 1].time);
  return gap;
}

namespace {

Dataset parse_header(const std::string& line, std::size_t line_no) {
  json h;
  try {
    h = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedInputError(line_no, std::string("invalid JSON header: ") + e.what());
  }
  if (!h.is_object() || !h.contains("num_types") || !h.contains("t_max"))
    throw MalformedInputError(line_no, "header must be {\"num_types\": K, \"t_max\": float}");
  const auto& k = h["num_types"];
  if (!k.is_number_integer() || k.get<long long>() <= 0)
    throw MalformedInputError(line_no, "num_types must be a positive integer");
  if (!h["t_max"].is_number()) throw MalformedInputError(line_no, "t_max must be a number");
  Dataset d;
  d.num_types = static_cast<std::uint32_t>(k.get<long long>());
  d.t_max = h["t_max"].get<double>();
  if (h.contains("max_gap")) {
    if (!h["max_gap"].is_number()) throw MalformedInputError(line_no, "max_gap must be a number");
    d.max_gap = h["max_gap"].get<double>();
  }
  return d;
}

EventSequence parse_sequence(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedInputError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("events") || !j["events"].is_array())
    throw MalformedInputError(line_no, "expected {\"id\": string, \"events\": [[time, mark], ...]}");
  EventSequence seq;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw MalformedInputError(line_no, "id must be a string");
    seq.id = j["id"].get<std::string>();
  } else {
    seq.id = "line" + std::to_string(line_no);
  }
  seq.events.reserve(j["events"].size());
  for (const auto& e : j["events"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number_integer())
      throw MalformedInputError(line_no, "event must be [time, integer mark]");
    if (e[1].get<long long>() < 0) throw SchemaError("line " + std::to_string(line_no) + ": negative mark");
    seq.events.push_back({e[0].get<double>(), static_cast<Mark>(e[1].get<long long>())});
  }
  return seq;
}

}  // namespace

LoadResult parse_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  LoadResult result;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!have_header) {
      result.dataset = parse_header(line, line_no);
      have_header = true;
      continue;
    }
    auto seq = parse_sequence(line, line_no);
    for (const auto& e : seq.events) {
      if (e.mark >= result.dataset.num_types)
        throw SchemaError("line " + std::to_string(line_no) + ": mark " + std::to_string(e.mark) +
                          " >= num_types " + std::to_string(result.dataset.num_types));
    }
    if (sort_events(seq)) ++result.resorted;
    result.dataset.sequences.push_back(std::move(seq));
  }
  if (!have_header) throw EmptyDatasetError("dataset file is empty");
  validate(result.dataset);
  return result;
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  json header = {{"num_types", dataset.num_types}, {"t_max", dataset.t_max}};
  if (dataset.max_gap) header["max_gap"] = *dataset.max_gap;
  out += header.dump();
  out += '\n';
  for (const auto& seq : dataset.sequences) {
    json events = json::array();
    for (const auto& e : seq.events) events.push_back(json::array({e.time, e.mark}));
    json line = {{"id", seq.id}, {"events", std::move(events)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

LoadResult load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  const std::string text = serialize_dataset(dataset);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void SplitSpec::validate() const {
  const double fr[] = {train_frac, val_frac, test_frac, clean_frac};
  double sum = 0.0;
  for (double f : fr) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

std::vector<std::size_t> split_counts(std::size_t n, const SplitSpec& spec) {
  const double fr[] = {spec.train_frac, spec.val_frac, spec.test_frac, spec.clean_frac};
  std::vector<std::size_t> counts(4);
  std::vector<double> remainder(4);
  std::size_t assigned = 0;
  for (int i = 0; i < 4; ++i) {
    const double exact = fr[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<int> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 4]];
  return counts;
}

SplitResult split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  if (dataset.empty()) throw EmptyDatasetError("cannot split an empty dataset");
  const std::size_t n = dataset.size();
  const auto counts = split_counts(n, spec);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng(spec.seed, 0x5b117);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

  // Shuffled order is carved as [train | clean | val | test]; the clean block
  // sits inside the training portion.
  std::vector<int> owner(n);
  std::size_t pos = 0;
  const int layout[] = {0, 3, 1, 2};
  for (int part : layout)
    for (std::size_t k = 0; k < counts[part]; ++k) owner[perm[pos++]] = part;

  SplitResult out;
  Dataset* parts[] = {&out.train, &out.val, &out.test, &out.clean};
  for (auto* p : parts) {
    p->num_types = dataset.num_types;
    p->t_max = dataset.t_max;
    p->max_gap = dataset.max_gap;
  }
  for (std::size_t i = 0; i < n; ++i) parts[owner[i]]->sequences.push_back(dataset.sequences[i]);

  const char* names[] = {"train", "val", "test", "clean"};
  const double fr[] = {spec.train_frac, spec.val_frac, spec.test_frac, spec.clean_frac};
  for (int i = 0; i < 4; ++i)
    if (fr[i] > 0.0 && counts[i] == 0)
      out.warnings.push_back(std::string(names[i]) + " split rounded to zero sequences");
  return out;
}

}  // namespace rdhp
