#ifndef SIGNSKIP_PARALLEL_HPP
#define SIGNSKIP_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace signskip {

// Runs fn(begin, end) over contiguous chunks of [0, total).
// Every index is handled exactly once and chunks are disjoint, so kernels
// that write only to their own output rows produce results independent of
// the thread count. Reductions must not use this directly; partition the
// output side instead (see accumulate_down).
template <class Fn>
void parallel_for(std::size_t total, unsigned threads, Fn&& fn) {
  if (total == 0) return;
  if (threads <= 1 || total == 1) {
    fn(std::size_t{0}, total);
    return;
  }
  unsigned n = std::min<std::size_t>(threads, total);
  std::size_t chunk = (total + n - 1) / n;
  std::vector<std::thread> pool;
  pool.reserve(n - 1);
  std::size_t begin = chunk;  // worker 0 runs inline below
  for (unsigned t = 1; t < n && begin < total; ++t) {
    std::size_t end = std::min(begin + chunk, total);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    begin = end;
  }
  fn(std::size_t{0}, std::min(chunk, total));
  for (auto& th : pool) th.join();
}

}  // namespace signskip

#endif  // SIGNSKIP_PARALLEL_HPP
