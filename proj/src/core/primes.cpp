#include "primes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace race {

SegmentedSieve::SegmentedSieve(std::uint64_t limit) : limit_(limit) {
  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  std::vector<bool> composite(root + 1, false);
  for (std::uint64_t i = 3; i <= root; i += 2) {
    if (composite[i]) continue;
    base_.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= root; j += 2 * i) composite[j] = true;
  }
}

void SegmentedSieve::odd_primes_in_segment(std::size_t s, std::vector<std::uint64_t>& out) const {
  const std::uint64_t lo = s * kSegmentSpan;  // even
  const std::uint64_t hi = std::min(lo + kSegmentSpan, limit_ + 1);
  if (hi <= lo) return;
  // bit i <-> lo + 2i + 1
  const std::uint64_t odds = (hi - lo) / 2;
  std::vector<std::uint64_t> bits((odds + 63) / 64, ~std::uint64_t{0});
  if (odds % 64 != 0) bits.back() = (std::uint64_t{1} << (odds % 64)) - 1;
  if (lo == 0) bits[0] &= ~std::uint64_t{1};  // 1 is not prime

  for (std::uint32_t p32 : base_) {
    const std::uint64_t p = p32;
    if (p * p >= hi) break;
    std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
    if (start % 2 == 0) start += p;
    for (std::uint64_t m = start; m < hi; m += 2 * p) {
      const std::uint64_t i = (m - lo) / 2;
      bits[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    }
  }
  for (std::size_t w = 0; w < bits.size(); ++w) {
    std::uint64_t word = bits[w];
    while (word != 0) {
      const int b = std::countr_zero(word);
      word &= word - 1;
      const std::uint64_t n = lo + 2 * (w * 64 + static_cast<std::uint64_t>(b)) + 1;
      if (n <= limit_) out.push_back(n);
    }
  }
}

}  // namespace race
