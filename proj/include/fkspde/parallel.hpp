#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fkspde {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Calls f(i) for i in [0, n). Each index is handled exactly once; results must be
// written to per-index slots so the outcome does not depend on the worker count.
template <class F>
void parallel_for(std::size_t n, int workers, F&& f) {
  const int w = std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < n; i += w) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// Fixed-shape pairwise summation.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace fkspde
