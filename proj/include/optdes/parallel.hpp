#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace optdes {

//! Data-parallel loop over [0, n) split into contiguous chunks, one per
//! thread. `body(begin, end)` must only write to per-index outputs.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  constexpr std::size_t kMinChunk = 2048;
  const std::size_t max_useful = std::max<std::size_t>(1, n / kMinChunk);
  const std::size_t t = std::min<std::size_t>(std::max(1u, threads), max_useful);
  if (t <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t c = 0; c < t; ++c) {
    const std::size_t b = c * chunk;
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back([&, b, e, c] {
      try {
        body(b, e);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace optdes
