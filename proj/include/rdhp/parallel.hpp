#pragma once

#include <cstddef>

namespace rdhp {

/// Selects between the OpenMP kernel and its serial reference. Both paths
/// produce bit-identical results: work items carry their own RNG streams and
/// reductions are performed in index order after the parallel region.
enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, n) under the requested execution policy.
template <typename Body>
void for_each_index(Execution exec, std::size_t n, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

int max_threads();

}  // namespace rdhp
