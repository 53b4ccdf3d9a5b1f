#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <vector>

#include "kahan.hpp"

namespace race {

// Globally adaptive Gauss-Kronrod (31 points) over [a, b]. Starts from
// `pieces` equal subintervals, which keeps narrow peaks from hiding between
// the initial nodes, then bisects the piece with the largest error estimate
// until the summed estimate is below max(abs_tol, rel_tol·|I|).
template <typename F>
double integrate(F&& f, double a, double b, int pieces, double rel_tol = 1e-13,
                 double abs_tol = 0.0, int max_pieces = 4000) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  struct Piece {
    double lo, hi, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi) {
    double err = 0.0;
    const double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Piece{lo, hi, v, err};
  };
  std::vector<Piece> heap;
  const double h = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i)
    heap.push_back(eval(a + h * i, i + 1 == pieces ? b : a + h * (i + 1)));
  std::make_heap(heap.begin(), heap.end());
  auto totals = [&] {
    KahanSum v, e;
    for (const auto& p : heap) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v.value(), e.value()};
  };
  auto [value, error] = totals();
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) &&
         static_cast<int>(heap.size()) < max_pieces) {
    std::pop_heap(heap.begin(), heap.end());
    const Piece worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    const Piece left = eval(worst.lo, mid), right = eval(mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
  }
  return totals().first;
}

}  // namespace race
