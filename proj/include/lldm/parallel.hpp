#pragma once

#include <cstddef>
#include <functional>

namespace lldm {

// Worker count used by parallel_for (0 restores the hardware default).
void set_thread_count(int n);
int thread_count();

// Runs fn(begin, end) over a static partition of [0, n). Each index is
// processed by exactly one worker in index order within its chunk, so results
// that depend only on the index are identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace lldm
