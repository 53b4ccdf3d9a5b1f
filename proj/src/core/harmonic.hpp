#pragma once

#include <cstdint>
#include <vector>

namespace race {

// G(θ) = Σ_{m <= Q} Λ(m)/m · #{a mod m : ||θ - a/m|| <= 1/x}, for x > 2Q.
class GFunction {
 public:
  GFunction(std::uint64_t Q, double x);

  double operator()(double theta) const;

  std::uint64_t Q() const { return Q_; }
  double x() const { return x_; }

 private:
  std::uint64_t Q_;
  double x_;
  std::vector<double> moduli_;   // prime powers m <= Q
  std::vector<double> weights_;  // Λ(m)/m
};

double g_function(double theta, std::uint64_t Q, double x);

// Points of [0, 1) whose pairwise circle distance is at least 1/x.
class SpacedPoints {
 public:
  SpacedPoints(std::vector<double> points, double x);

  const std::vector<double>& points() const { return points_; }
  double spacing() const { return spacing_; }  // +inf for a single point
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;
  double spacing_;
};

struct PairSumReport {
  double sum = 0.0;
  double paper_form = 0.0;  // √(RS) log²(2QRS) + RSQ/x
  double ratio = 0.0;
};

// Both sets must be spaced for this x.
PairSumReport pair_sum_report(const SpacedPoints& thetas, const SpacedPoints& phis,
                              std::uint64_t Q, double x);

}  // namespace race
