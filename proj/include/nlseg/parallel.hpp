#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace nlseg {

// Thread count used by the parallel loops. 0 means "use the default", which is
// NLSEG_THREADS from the environment if set, else 1.
void set_threads(int n);
int threads();

// Runs body(begin, end) over [0, n) split into fixed chunks. Output must be
// written per index; the partition never affects results.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body,
                  std::int64_t grain = 4096);

// Sums are taken over fixed 4096-element blocks and the block partials are
// added in order, so the result is independent of the thread count.
double det_sum(const double* x, std::size_t n);
double det_dot(const double* x, const double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);

}  // namespace nlseg
