#pragma once

#include <functional>

namespace spiked {

/// Parallelism cap: min(hardware_concurrency, SPIKED_LANGEVIN_THREADS if set).
int thread_cap();

/// Runs body(i) for i in [0, count) on up to thread_cap() threads. Tasks must
/// be independent; results written to per-index slots stay deterministic.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace spiked
