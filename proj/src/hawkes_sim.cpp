#include "rdhp/hawkes_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdhp/errors.hpp"
#include "rdhp/rng.hpp"

namespace rdhp {

namespace {

void check_square(const Matrix& m, std::size_t k, const char* label) {
  if (m.size() != k) throw ConfigError(std::string(label) + " must have " + std::to_string(k) + " rows");
  for (const auto& row : m)
    if (row.size() != k) throw ConfigError(std::string(label) + " must be square");
}

// Excitation state S[o][j]: summed contribution of past type-j events to the
// type-o intensity, decayed to the current time.
class ExcitationState {
 public:
  explicit ExcitationState(const HawkesParams& p)
      : p_(p), s_(p.dim(), std::vector<double>(p.dim(), 0.0)) {}

  void decay(double dt) {
    if (dt <= 0.0) return;
    const auto& g = p_.gamma();
    for (std::size_t o = 0; o < s_.size(); ++o)
      for (std::size_t j = 0; j < s_.size(); ++j)
        if (s_[o][j] != 0.0) s_[o][j] *= std::exp(-g[o][j] * dt);
  }

  void excite(Mark j) {
    const auto& a = p_.alpha();
    for (std::size_t o = 0; o < s_.size(); ++o) s_[o][j] += a[o][j];
  }

  double intensity(std::size_t o) const {
    double v = p_.mu()[o];
    for (double x : s_[o]) v += x;
    return v;
  }

  double total() const {
    double v = 0.0;
    for (std::size_t o = 0; o < s_.size(); ++o) v += intensity(o);
    return v;
  }

  // Integral of lambda_o over (t, t + dt] given the state at t.
  double integral(std::size_t o, double dt) const {
    double v = p_.mu()[o] * dt;
    const auto& g = p_.gamma();
    for (std::size_t j = 0; j < s_.size(); ++j)
      if (s_[o][j] != 0.0) v += s_[o][j] / g[o][j] * -std::expm1(-g[o][j] * dt);
    return v;
  }

 private:
  const HawkesParams& p_;
  Matrix s_;
};

}  // namespace

HawkesParams::HawkesParams(std::vector<double> mu, Matrix alpha, Matrix gamma)
    : mu_(std::move(mu)), alpha_(std::move(alpha)), gamma_(std::move(gamma)) {
  const std::size_t k = mu_.size();
  if (k == 0) throw ConfigError("HawkesParams requires at least one type");
  check_square(alpha_, k, "alpha");
  check_square(gamma_, k, "gamma");
  for (double m : mu_)
    if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("mu entries must be finite and >= 0");
  for (std::size_t o = 0; o < k; ++o)
    for (std::size_t j = 0; j < k; ++j) {
      if (!(alpha_[o][j] >= 0.0) || !std::isfinite(alpha_[o][j]))
        throw ConfigError("alpha entries must be finite and >= 0");
      if (!(gamma_[o][j] > 0.0) || !std::isfinite(gamma_[o][j]))
        throw ConfigError("gamma entries must be finite and > 0");
    }
  Matrix ratio(k, std::vector<double>(k));
  for (std::size_t o = 0; o < k; ++o)
    for (std::size_t j = 0; j < k; ++j) ratio[o][j] = alpha_[o][j] / gamma_[o][j];
  branching_ratio_ = spectral_radius(ratio);
}

HawkesParams HawkesParams::poisson(std::vector<double> mu) {
  const std::size_t k = mu.size();
  return HawkesParams(std::move(mu), Matrix(k, std::vector<double>(k, 0.0)),
                      Matrix(k, std::vector<double>(k, 1.0)));
}

double spectral_radius(const Matrix& m) {
  const std::size_t k = m.size();
  Matrix b = m;
  double log_scale = 0.0;
  double weight = 1.0;  // 2^-squarings
  for (int it = 0; it < 48; ++it) {
    double norm = 0.0;
    for (const auto& row : b) {
      double s = 0.0;
      for (double x : row) s += std::abs(x);
      norm = std::max(norm, s);
    }
    if (norm == 0.0) return 0.0;
    for (auto& row : b)
      for (double& x : row) x /= norm;
    log_scale += weight * std::log(norm);
    Matrix sq(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l)
        if (b[i][l] != 0.0)
          for (std::size_t j = 0; j < k; ++j) sq[i][j] += b[i][l] * b[l][j];
    b = std::move(sq);
    weight *= 0.5;
  }
  return std::exp(log_scale);
}

double intensity_at(const HawkesParams& params, const EventSequence& history, double t, Mark type) {
  if (t < 0.0) throw DomainError("intensity_at: t must be >= 0");
  if (type >= params.dim()) throw DomainError("intensity_at: type out of range");
  double v = params.mu()[type];
  for (const auto& e : history.events) {
    if (!(e.time < t)) break;
    v += params.alpha()[type][e.mark] * std::exp(-params.gamma()[type][e.mark] * (t - e.time));
  }
  return v;
}

double compensator(const HawkesParams& params, const EventSequence& seq, double t_end, Mark type) {
  if (type >= params.dim()) throw DomainError("compensator: type out of range");
  double v = params.mu()[type] * t_end;
  for (const auto& e : seq.events) {
    if (!(e.time < t_end)) break;
    const double g = params.gamma()[type][e.mark];
    v += params.alpha()[type][e.mark] / g * -std::expm1(-g * (t_end - e.time));
  }
  return v;
}

namespace {

// Walks the sequence once, calling visit(i, state) with the state decayed to
// t_i and holding only events strictly before t_i.
template <typename Visit>
void sweep_events(const HawkesParams& params, const EventSequence& seq, Visit&& visit) {
  ExcitationState state(params);
  double now = 0.0;
  std::size_t i = 0;
  const auto& ev = seq.events;
  while (i < ev.size()) {
    const double t = ev[i].time;
    state.decay(t - now);
    now = t;
    std::size_t j = i;
    while (j < ev.size() && ev[j].time == t) {
      visit(j, state, now);
      ++j;
    }
    for (std::size_t k = i; k < j; ++k) state.excite(ev[k].mark);
    i = j;
  }
}

}  // namespace

double log_likelihood(const HawkesParams& params, const EventSequence& seq, double t_max) {
  double ll = 0.0;
  bool zero = false;
  sweep_events(params, seq, [&](std::size_t i, const ExcitationState& s, double) {
    const double lam = s.intensity(seq.events[i].mark);
    if (!(lam > 0.0)) zero = true;
    else ll += std::log(lam);
  });
  if (zero) return -std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o < params.dim(); ++o)
    ll -= compensator(params, seq, t_max, static_cast<Mark>(o));
  return ll;
}

std::vector<double> rescaled_intervals(const HawkesParams& params, const EventSequence& seq) {
  const std::size_t k = params.dim();
  // cumulative[o] tracks the type-o compensator at the current sweep time.
  std::vector<double> cumulative(k, 0.0), at_last(k, 0.0);
  std::vector<double> out;
  out.reserve(seq.size());
  double prev_time = 0.0;
  ExcitationState state(params);
  std::size_t i = 0;
  const auto& ev = seq.events;
  while (i < ev.size()) {
    const double t = ev[i].time;
    for (std::size_t o = 0; o < k; ++o) cumulative[o] += state.integral(o, t - prev_time);
    state.decay(t - prev_time);
    prev_time = t;
    std::size_t j = i;
    for (; j < ev.size() && ev[j].time == t; ++j) {
      const Mark m = ev[j].mark;
      out.push_back(cumulative[m] - at_last[m]);
      at_last[m] = cumulative[m];
    }
    for (std::size_t q = i; q < j; ++q) state.excite(ev[q].mark);
    i = j;
  }
  return out;
}

SimulationResult simulate(const HawkesParams& params, double t_max, std::uint64_t seed,
                          const SimulationOptions& options) {
  SimulationResult result;
  if (!(t_max > 0.0)) return result;
  CounterRng rng(seed);
  ExcitationState state(params);
  const std::size_t k = params.dim();
  double t = 0.0;
  while (true) {
    const double bound = state.total();
    if (!(bound > 0.0)) break;
    const double wait = rng.exponential(bound);
    state.decay(wait);
    t += wait;
    if (t > t_max) break;
    const double u = rng.uniform() * bound;
    double acc = 0.0;
    std::size_t chosen = k;
    for (std::size_t o = 0; o < k; ++o) {
      acc += state.intensity(o);
      if (u < acc) {
        chosen = o;
        break;
      }
    }
    if (chosen == k) continue;  // rejected
    if (result.sequence.size() >= options.max_events) {
      result.truncated = true;
      break;
    }
    result.sequence.events.push_back({t, static_cast<Mark>(chosen)});
    state.excite(static_cast<Mark>(chosen));
  }
  return result;
}

SimulatedDataset simulate_dataset(const HawkesParams& params, std::size_t n_seqs, double t_max,
                                  std::uint64_t seed, Execution exec, const SimulationOptions& options) {
  std::vector<SimulationResult> runs(n_seqs);
  const CounterRng root(seed);
  for_each_index(exec, n_seqs, [&](std::size_t i) {
    runs[i] = simulate(params, t_max, root.derive(i).next(), options);
  });
  SimulatedDataset out;
  out.dataset.num_types = static_cast<std::uint32_t>(params.dim());
  out.dataset.t_max = t_max;
  for (std::size_t i = 0; i < n_seqs; ++i) {
    if (runs[i].truncated) ++out.truncated;
    if (runs[i].sequence.empty()) {
      ++out.dropped_empty;
      continue;
    }
    runs[i].sequence.id = "s" + std::to_string(i);
    out.dataset.sequences.push_back(std::move(runs[i].sequence));
  }
  return out;
}

}  // namespace rdhp
