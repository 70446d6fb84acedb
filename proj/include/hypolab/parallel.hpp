#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hypolab {

// Runs f(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure (lowest index).
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace hypolab
