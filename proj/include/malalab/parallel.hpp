#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace malalab {

// Runs body(begin, end) over a fixed blocking of [0, n). The blocking depends
// only on (n, workers), never on scheduling, and callers write results by
// index, so output is identical for any worker count. With workers <= 1 the
// body runs inline.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    body(std::size_t(0), n);
    return;
  }
  const std::size_t nw = std::min<std::size_t>(std::size_t(workers), n);
  const std::size_t chunk = (n + nw - 1) / nw;
  std::vector<std::thread> threads;
  threads.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    threads.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& t : threads) t.join();
}

}
