#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pinembed::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(begin, end, chunk_index) over `chunks` contiguous slices of
// [0, count). Chunk boundaries depend only on count and chunks.
template <class Body>
void parallel_chunks(std::size_t count, unsigned threads, Body&& body) {
  threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    body(std::size_t{0}, count, 0u);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned c = 0; c < threads; ++c) {
    const std::size_t begin = count * c / threads;
    const std::size_t end = count * (c + 1) / threads;
    workers.emplace_back([&, begin, end, c] {
      try {
        body(begin, end, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pinembed::detail
