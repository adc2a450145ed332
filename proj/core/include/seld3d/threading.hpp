#pragma once

#include <cstddef>
#include <functional>

namespace seld3d {

/// Worker count for data-parallel loops: SELD3D_THREADS when set (minimum 1),
/// otherwise the hardware concurrency.
int thread_budget();

/// Runs fn(i) for i in [0, n). Work is split across thread_budget() threads;
/// each index runs exactly once, so per-index output slots stay deterministic
/// regardless of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace seld3d
