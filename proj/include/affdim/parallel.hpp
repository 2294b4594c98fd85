#pragma once

#include <cstddef>
#include <functional>

namespace affdim {

/// Worker count used by parallel loops. Defaults to AFFDIM_THREADS, else the
/// hardware concurrency.
int thread_count();
void set_thread_count(int threads);

/// Calls body(i) for i in [0, n) across the worker pool. Each index is handled
/// exactly once; callers write results into per-index slots and reduce
/// afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Same, but hands each worker a contiguous [begin, end) block.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace affdim
