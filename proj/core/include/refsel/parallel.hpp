#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace refsel {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Tasks must write
// only to their own output slots; results are index-ordered, so the
// outcome does not depend on scheduling. The first thrown exception is
// rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(jobs);
  const int workers = std::min<std::size_t>(jobs, n);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace refsel
