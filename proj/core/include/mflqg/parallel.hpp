#pragma once

#include <cstddef>
#include <functional>

namespace mflqg {

// Worker count: `requested` if positive, else MFLQG_THREADS if set, else the
// hardware concurrency.
int worker_count(int requested = 0);

// Runs body(i) for i in [0, count) on up to worker_count(threads) threads.
// Iterations must write only to their own slots. The first exception thrown
// by any iteration is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace mflqg
