#pragma once

#include <cstddef>
#include <functional>

namespace surfdist {

// Worker count: SURFDIST_THREADS if set (>= 1), else hardware concurrency.
std::size_t thread_count();

// Runs body(i) for every i in [begin, end). Indices are split into contiguous
// static chunks; nested calls from inside a worker run inline. Callers write
// results by index, so output never depends on the thread count.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace surfdist
