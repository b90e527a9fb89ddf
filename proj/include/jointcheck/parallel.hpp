#pragma once

#include <cstddef>
#include <functional>

namespace jointcheck {

// Worker count used by parallel_for. Resolution order: explicit set_threads,
// JOINTCHECK_THREADS environment variable, hardware concurrency.
void set_threads(unsigned n);
unsigned thread_count();

// Runs fn(i) for i in [0, n). Tasks must only write to index-addressed slots;
// reductions belong to the caller, in index order, so results are identical
// for any worker count. Nested calls run inline on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace jointcheck
