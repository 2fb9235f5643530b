#pragma once

#include <cstdint>
#include <vector>

#include "rdhp/parallel.hpp"
#include "rdhp/tpp_core.hpp"

namespace rdhp {

using Matrix = std::vector<std::vector<double>>;

/// Multivariate Hawkes process with exponential kernels:
///   lambda_o(t) = mu[o] + sum_{t_j < t} alpha[o][m_j] * exp(-gamma[o][m_j] * (t - t_j)).
/// alpha[o][j] is the effect of a type-j event on the type-o intensity.
class HawkesParams {
 public:
  HawkesParams() = default;
  HawkesParams(std::vector<double> mu, Matrix alpha, Matrix gamma);

  /// Poisson-only convenience constructor (alpha = 0, gamma = 1).
  static HawkesParams poisson(std::vector<double> mu);

  std::size_t dim() const noexcept { return mu_.size(); }
  const std::vector<double>& mu() const noexcept { return mu_; }
  const Matrix& alpha() const noexcept { return alpha_; }
  const Matrix& gamma() const noexcept { return gamma_; }

  /// Spectral radius of the branching matrix alpha[o][j] / gamma[o][j].
  double branching_ratio() const noexcept { return branching_ratio_; }
  /// False when the branching ratio is >= 1. Unstable params still simulate,
  /// but with a hard cap on sequence length.
  bool stable() const noexcept { return branching_ratio_ < 1.0; }

 private:
  std::vector<double> mu_;
  Matrix alpha_;
  Matrix gamma_;
  double branching_ratio_ = 0.0;
};

/// Spectral radius of a square non-negative matrix via repeated squaring.
double spectral_radius(const Matrix& m);

/// lambda_type(t) counting only history events strictly before t.
double intensity_at(const HawkesParams& params, const EventSequence& history, double t, Mark type);

/// Integral of lambda_type over [0, t_end], closed form.
double compensator(const HawkesParams& params, const EventSequence& seq, double t_end, Mark type);

/// sum_i log lambda_{m_i}(t_i) - sum_o integral_0^t_max lambda_o. Returns -inf
/// when an observed event has zero intensity.
double log_likelihood(const HawkesParams& params, const EventSequence& seq, double t_max);

/// Per-type time-rescaled inter-event intervals: for each type o, the
/// increments of the type-o compensator between successive type-o events
/// (starting at 0). Under the true params these are i.i.d. Exponential(1).
std::vector<double> rescaled_intervals(const HawkesParams& params, const EventSequence& seq);

struct SimulationOptions {
  /// Cap applied to every run; only reachable in practice for unstable params.
  std::size_t max_events = 200000;
};

struct SimulationResult {
  EventSequence sequence;
  bool truncated = false;
};

/// Ogata thinning. The proposal rate is the total intensity right after the
/// most recent candidate, which bounds the decaying intensity until the next
/// accepted event.
SimulationResult simulate(const HawkesParams& params, double t_max, std::uint64_t seed,
                          const SimulationOptions& options = {});

struct SimulatedDataset {
  Dataset dataset;
  std::size_t truncated = 0;
  /// Realisations with no events in [0, t_max]; they are not added.
  std::size_t dropped_empty = 0;
};

/// n independent realisations; sequence i uses stream i of seed, so the
/// serial and parallel kernels agree exactly.
SimulatedDataset simulate_dataset(const HawkesParams& params, std::size_t n_seqs, double t_max,
                                  std::uint64_t seed, Execution exec = Execution::parallel,
                                  const SimulationOptions& options = {});

}  // namespace rdhp
