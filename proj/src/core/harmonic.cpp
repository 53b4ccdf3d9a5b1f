#include "harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "arith.hpp"
#include "errors.hpp"
#include "kahan.hpp"

namespace race {

GFunction::GFunction(std::uint64_t Q, double x) : Q_(Q), x_(x) {
  if (Q < 1) throw_domain("Q must be at least 1");
  if (!(x > 2.0 * static_cast<double>(Q))) throw_domain("x must exceed 2Q");
  for (std::uint64_t m = 2; m <= Q; ++m) {
    const double lam = von_mangoldt(m);
    if (lam == 0.0) continue;
    moduli_.push_back(static_cast<double>(m));
    weights_.push_back(lam / static_cast<double>(m));
  }
}

double GFunction::operator()(double theta) const {
  // ||θ - a/m|| <= 1/x  <=>  |θm - round(θm)| <= m/x; x > 2Q leaves one a.
  KahanSum s;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    const double t = theta * moduli_[i];
    if (std::abs(t - std::round(t)) <= moduli_[i] / x_) s += weights_[i];
  }
  return s.value();
}

double g_function(double theta, std::uint64_t Q, double x) { return GFunction(Q, x)(theta); }

SpacedPoints::SpacedPoints(std::vector<double> points, double x)
    : points_(std::move(points)), spacing_(std::numeric_limits<double>::infinity()) {
  if (points_.empty()) throw_domain("point set is empty");
  if (!(x > 0.0)) throw_domain("x must be positive");
  for (double p : points_)
    if (!(p >= 0.0 && p < 1.0)) throw_validation("points must lie in [0, 1)");
  std::vector<double> sorted = points_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    spacing_ = std::min(spacing_, sorted[i + 1] - sorted[i]);
  if (sorted.size() > 1) spacing_ = std::min(spacing_, 1.0 - sorted.back() + sorted.front());
  if (spacing_ < 1.0 / x)
    throw_validation("points are not 1/x-spaced (min gap " + std::to_string(spacing_) + ")");
}

PairSumReport pair_sum_report(const SpacedPoints& thetas, const SpacedPoints& phis,
                              std::uint64_t Q, double x) {
  if (thetas.spacing() < 1.0 / x || phis.spacing() < 1.0 / x)
    throw_validation("points are not 1/x-spaced for this x");
  const GFunction g(Q, x);
  KahanSum s;
  for (double t : thetas.points())
    for (double p : phis.points()) s += g(t - p);
  const double rs = static_cast<double>(thetas.size() * phis.size());
  const double l = std::log(2.0 * static_cast<double>(Q) * rs);
  PairSumReport rep;
  rep.sum = s.value();
  rep.paper_form = std::sqrt(rs) * l * l + rs * static_cast<double>(Q) / x;
  rep.ratio = rep.sum / rep.paper_form;
  return rep;
}

}  // namespace race
