#include "nlseg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlseg {

namespace {
std::atomic<int> g_threads{0};

int env_threads() {
  const char* s = std::getenv("NLSEG_THREADS");
  if (!s) return 1;
  int n = std::atoi(s);
  return n > 0 ? n : 1;
}

constexpr std::size_t kBlock = 4096;
}  // namespace

void set_threads(int n) { g_threads = n > 0 ? n : 0; }

int threads() {
  int n = g_threads.load();
  return n > 0 ? n : env_threads();
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body,
                  std::int64_t grain) {
  if (n <= 0) return;
  grain = std::max<std::int64_t>(grain, 1);
  const std::int64_t nchunks = (n + grain - 1) / grain;
  const int nt = threads();
  if (nt <= 1 || nchunks == 1) {
    body(0, n);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t c = 0; c < nchunks; ++c) {
    std::int64_t b = c * grain;
    body(b, std::min(n, b + grain));
  }
#else
  body(0, n);
#endif
}

double det_sum(const double* x, std::size_t n) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> part(nb, 0.0);
  parallel_for(static_cast<std::int64_t>(nb), [&](std::int64_t b0, std::int64_t b1) {
    for (std::int64_t b = b0; b < b1; ++b) {
      std::size_t s = b * kBlock, e = std::min(n, s + kBlock);
      double acc = 0.0;
      for (std::size_t i = s; i < e; ++i) acc += x[i];
      part[b] = acc;
    }
  }, 1);
  double t = 0.0;
  for (double p : part) t += p;
  return t;
}

double det_dot(const double* x, const double* y, std::size_t n) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> part(nb, 0.0);
  parallel_for(static_cast<std::int64_t>(nb), [&](std::int64_t b0, std::int64_t b1) {
    for (std::int64_t b = b0; b < b1; ++b) {
      std::size_t s = b * kBlock, e = std::min(n, s + kBlock);
      double acc = 0.0;
      for (std::size_t i = s; i < e; ++i) acc += x[i] * y[i];
      part[b] = acc;
    }
  }, 1);
  double t = 0.0;
  for (double p : part) t += p;
  return t;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace nlseg
