#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace polydiff::detail {

// Splits [0, n) into contiguous chunks, one per hardware thread. `fn(begin,
// end)` must only write state owned by its chunk.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t min_chunk, Fn&& fn) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk)));
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk), end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(std::size_t{0}, std::min(n, chunk));
}

}  // namespace polydiff::detail
