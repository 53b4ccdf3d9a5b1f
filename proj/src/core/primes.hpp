#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace race {

// Segmented odd-only sieve of Eratosthenes over [2, limit].
class SegmentedSieve {
 public:
  static constexpr std::uint64_t kSegmentSpan = 8'000'000;  // integers per segment

  explicit SegmentedSieve(std::uint64_t limit);

  std::uint64_t limit() const { return limit_; }
  std::size_t segment_count() const {
    return static_cast<std::size_t>(limit_ / kSegmentSpan + 1);
  }
  // Odd primes of segment s (covering [s·span, (s+1)·span) ∩ [3, limit]),
  // appended in increasing order.
  void odd_primes_in_segment(std::size_t s, std::vector<std::uint64_t>& out) const;

 private:
  std::uint64_t limit_;
  std::vector<std::uint32_t> base_;  // odd primes up to sqrt(limit)
};

// Calls f(p) for every prime p <= limit in increasing order. Segments are
// sieved `workers` at a time in parallel; f always runs on the calling thread.
template <typename F>
void for_each_prime(std::uint64_t limit, F&& f, unsigned workers = 1) {
  if (limit < 2) return;
  f(std::uint64_t{2});
  const SegmentedSieve sieve(limit);
  const std::size_t segments = sieve.segment_count();
  if (workers == 0) workers = 1;
  std::vector<std::vector<std::uint64_t>> batch(workers);
  for (std::size_t first = 0; first < segments; first += workers) {
    const std::size_t count = std::min<std::size_t>(workers, segments - first);
    if (count == 1) {
      batch[0].clear();
      sieve.odd_primes_in_segment(first, batch[0]);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t i = 0; i < count; ++i) {
        threads.emplace_back([&, i] {
          batch[i].clear();
          sieve.odd_primes_in_segment(first + i, batch[i]);
        });
      }
      for (auto& t : threads) t.join();
    }
    for (std::size_t i = 0; i < count; ++i)
      for (std::uint64_t p : batch[i]) f(p);
  }
}

}  // namespace race
