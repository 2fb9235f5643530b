#include "rdhp/parallel.hpp"

#include <omp.h>

namespace rdhp {

int max_threads() { return omp_get_max_threads(); }

}  // namespace rdhp
