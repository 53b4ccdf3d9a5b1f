#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace race {

enum class Outcome { Fail, Hold, Tie };

// A race pattern over the positions 0..n-1 of a residue tuple.
class OrderingEvent {
 public:
  enum class Kind { FullOrdering, Leader, FirstK };

  // order[0] > order[1] > ... > order[n-1]; must be a permutation of 0..n-1.
  static OrderingEvent full(std::vector<std::size_t> order);
  static OrderingEvent leader(std::size_t index, std::size_t n);
  // 0 > 1 > ... > k-1 > max(k..n-1). k >= n-1 is the identity full ordering.
  static OrderingEvent first_k(std::size_t k, std::size_t n);

  // Grammar over 1-based positions: "full:i1,...,in", "leader:i", "firstk:k".
  static OrderingEvent parse(std::string_view spec, std::size_t n);
  std::string to_string() const;

  Kind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  // Number of strictly ordered leading places: n for full, 1 for leader, k.
  std::size_t k() const;
  std::size_t leader_index() const { return leader_; }
  const std::vector<std::size_t>& order() const { return order_; }

  // 1/n!, 1/n or (n-k)!/n! by exchangeability.
  double symmetric_prediction() const;

  // Strict comparisons; any equality among the compared pairs is a Tie.
  template <typename T>
  Outcome evaluate(std::span<const T> x) const;

 private:
  Kind kind_ = Kind::FullOrdering;
  std::size_t n_ = 0;
  std::size_t leader_ = 0;
  std::size_t k_ = 0;
  std::vector<std::size_t> order_;
};

template <typename T>
Outcome OrderingEvent::evaluate(std::span<const T> x) const {
  bool hold = true;
  if (kind_ == Kind::Leader) {
    const T lead = x[leader_];
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == leader_) continue;
      if (x[j] == lead) return Outcome::Tie;
      if (x[j] > lead) hold = false;
    }
    return hold ? Outcome::Hold : Outcome::Fail;
  }
  // Chain over order_[0..k_-1], then order_[k_-1] against the rest.
  for (std::size_t i = 0; i + 1 < k_; ++i) {
    const T a = x[order_[i]], b = x[order_[i + 1]];
    if (a == b) return Outcome::Tie;
    if (!(a > b)) hold = false;
  }
  const T last = x[order_[k_ - 1]];
  for (std::size_t i = k_; i < n_; ++i) {
    const T b = x[order_[i]];
    if (b == last) return Outcome::Tie;
    if (!(last > b)) hold = false;
  }
  return hold ? Outcome::Hold : Outcome::Fail;
}

}  // namespace race
