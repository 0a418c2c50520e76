#pragma once

#include <cstddef>
#include <functional>

namespace whiteout {

// Worker count: explicit value if > 0, else WHITEOUT_THREADS, else hardware.
int resolve_threads(int requested);

// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
// write results into slot i so the outcome never depends on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace whiteout
