#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "thermowave/grid.hpp"

namespace thermowave {

// Worker count: THERMOWAVE_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
int worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads; calls
// nested inside a running body execute serially. The first
// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Sum of grids with a fixed pairwise tree topology, so the rounding of the
// result does not depend on scheduling.
Grid pairwise_sum(std::vector<Grid> terms);

}  // namespace thermowave
