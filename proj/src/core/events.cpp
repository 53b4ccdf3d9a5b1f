#include "events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace race {

OrderingEvent OrderingEvent::full(std::vector<std::size_t> order) {
  const std::size_t n = order.size();
  if (n == 0) throw_domain("empty ordering");
  std::vector<bool> seen(n, false);
  for (std::size_t i : order) {
    if (i >= n || seen[i]) throw_domain("ordering is not a permutation of the tuple positions");
    seen[i] = true;
  }
  OrderingEvent e;
  e.kind_ = Kind::FullOrdering;
  e.n_ = n;
  e.k_ = n;
  e.order_ = std::move(order);
  return e;
}

OrderingEvent OrderingEvent::leader(std::size_t index, std::size_t n) {
  if (index >= n) throw_domain("leader index outside the tuple");
  OrderingEvent e;
  e.kind_ = Kind::Leader;
  e.n_ = n;
  e.k_ = 1;
  e.leader_ = index;
  e.order_.resize(n);
  std::iota(e.order_.begin(), e.order_.end(), 0);
  std::swap(e.order_[0], e.order_[index]);
  return e;
}

OrderingEvent OrderingEvent::first_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) throw_domain("first-k needs 1 <= k <= n");
  OrderingEvent e;
  e.kind_ = Kind::FirstK;
  e.n_ = n;
  e.k_ = k;
  e.order_.resize(n);
  std::iota(e.order_.begin(), e.order_.end(), 0);
  return e;
}

std::size_t OrderingEvent::k() const { return k_; }

namespace {

std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw_validation("bad event index '" + std::string(s) + "'");
  return v;
}

}  // namespace

OrderingEvent OrderingEvent::parse(std::string_view spec, std::size_t n) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw_validation("event '" + std::string(spec) + "' lacks ':'");
  const std::string_view head = spec.substr(0, colon);
  const std::string_view body = spec.substr(colon + 1);
  if (head == "leader") {
    const std::size_t i = parse_index(body);
    if (i < 1 || i > n) throw_validation("leader index out of range in '" + std::string(spec) + "'");
    return leader(i - 1, n);
  }
  if (head == "firstk") {
    const std::size_t k = parse_index(body);
    if (k < 1 || k > n) throw_validation("firstk k out of range in '" + std::string(spec) + "'");
    return first_k(k, n);
  }
  if (head == "full") {
    std::vector<std::size_t> order;
    std::size_t start = 0;
    while (start <= body.size()) {
      const auto comma = body.find(',', start);
      const auto stop = comma == std::string_view::npos ? body.size() : comma;
      const std::size_t i = parse_index(body.substr(start, stop - start));
      if (i < 1) throw_validation("positions are 1-based in '" + std::string(spec) + "'");
      order.push_back(i - 1);
      start = stop + 1;
    }
    if (order.size() != n)
      throw_validation("full ordering names " + std::to_string(order.size()) +
                       " positions but the tuple has " + std::to_string(n));
    try {
      return full(std::move(order));
    } catch (const Error& e) {
      throw_validation(e.what());
    }
  }
  throw_validation("unknown event kind '" + std::string(head) + "'");
}

std::string OrderingEvent::to_string() const {
  switch (kind_) {
    case Kind::Leader: return "leader:" + std::to_string(leader_ + 1);
    case Kind::FirstK: return "firstk:" + std::to_string(k_);
    case Kind::FullOrdering: {
      std::string s = "full:";
      for (std::size_t i = 0; i < order_.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(order_[i] + 1);
      }
      return s;
    }
  }
  return {};
}

double OrderingEvent::symmetric_prediction() const {
  // (n-k)!/n! = 1/(n(n-1)...(n-k+1)); full orderings have k = n.
  const std::size_t places = kind_ == Kind::FullOrdering ? n_ : std::min(k_, n_);
  double log_p = 0.0;
  for (std::size_t i = 0; i < places; ++i) log_p -= std::log(static_cast<double>(n_ - i));
  return std::exp(log_p);
}

}  // namespace race
