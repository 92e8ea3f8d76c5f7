// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tvflow {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work is handed
/// out dynamically; results must be written to per-index slots by the caller.
/// An exception in one index does not stop the others; the returned vector
/// holds the exception (or null) per index.
inline std::vector<std::exception_ptr> parallel_for(std::size_t count, int workers,
                                                    const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    run();
    return errors;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  return errors;
}

}  // namespace tvflow
