#pragma once

#include <cstddef>
#include <functional>

namespace onom {

// Process-wide worker count. 1 (the default) runs everything on the calling
// thread, which is the only mode with bit-reproducible stochastic stages.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [begin, end) split into contiguous static chunks.
/// Each index is visited exactly once; callers write to disjoint slots.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace onom
