#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace survshap {

/// Hardware concurrency, at least 1.
std::size_t default_threads();

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks write
/// their own output slots, so results are independent of scheduling. The
/// first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

/// Independent generator for substream `index` of `seed`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

}  // namespace survshap
