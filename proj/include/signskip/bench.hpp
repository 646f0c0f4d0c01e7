#ifndef SIGNSKIP_BENCH_HPP
#define SIGNSKIP_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <vector>

namespace signskip {

struct TimingResult {
  double median_us = 0.0;
  double min_us = 0.0;
  double max_us = 0.0;
  int repeats = 0;
};

// Blocks the compiler from discarding a benchmarked result.
template <class T>
inline void do_not_optimize(T const& value) {
  asm volatile("" : : "r,m"(value) : "memory");
}

// Warmup runs, then the median of `repeats` timed runs. Median of an even
// count is the mean of the two middle samples.
template <class F>
TimingResult time_median(int warmup, int repeats, F&& body) {
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < warmup; ++i) body();
  std::vector<double> samples;
  samples.reserve(repeats);
  for (int i = 0; i < repeats; ++i) {
    auto t0 = clock::now();
    body();
    auto t1 = clock::now();
    samples.push_back(
        std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  std::sort(samples.begin(), samples.end());
  TimingResult r;
  r.repeats = repeats;
  r.min_us = samples.front();
  r.max_us = samples.back();
  std::size_t mid = samples.size() / 2;
  r.median_us = samples.size() % 2 == 1
                    ? samples[mid]
                    : 0.5 * (samples[mid - 1] + samples[mid]);
  return r;
}

}  // namespace signskip

#endif  // SIGNSKIP_BENCH_HPP
