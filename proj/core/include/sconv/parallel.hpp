#pragma once

#include <cstddef>
#include <functional>

namespace sconv {

// Worker cap shared by every parallel loop; defaults to the logical core count.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Iterations must be independent; results are
// identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sconv
