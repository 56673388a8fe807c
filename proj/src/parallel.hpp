#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace lvx {

// worker count: hardware concurrency capped by LVX_THREADS
inline std::size_t thread_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LVX_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

// fn(i) for i in [0, n) over contiguous chunks; fn must only write to
// per-index state so the result does not depend on the schedule
inline bool& inside_parallel_region() {
  thread_local bool inside = false;
  return inside;
}

// nested calls run serially on the calling worker
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = inside_parallel_region() ? 1 : std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      inside_parallel_region() = true;
      try {
        const std::size_t hi = std::min(n, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lvx
