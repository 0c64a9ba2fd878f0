#pragma once

// Deterministic fan-out over independent work items. Each index writes only
// its own output slot, so results never depend on scheduling.

#include <cstddef>
#include <functional>

namespace cforge {

/// Worker count: CONSTRAINT_FORGE_THREADS if set (>= 1), else the hardware
/// concurrency.
int thread_cap();

/// Calls fn(i) for i in [0, count) on up to thread_cap() threads. The first
/// exception thrown by any item is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace cforge
