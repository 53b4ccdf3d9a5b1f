#pragma once

// Test-only Gaussian helpers built on std::mt19937_64 and Eigen, independent
// of the library's generator and samplers.

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace oracle {

// Law of X_{k+1..n} given X_1..X_k = x for X ~ N(0, sigma).
class ConditionalGaussian {
 public:
  ConditionalGaussian(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& x) {
    const auto k = x.size(), m = sigma.rows() - k;
    const Eigen::MatrixXd s11 = sigma.topLeftCorner(k, k);
    const Eigen::MatrixXd s21 = sigma.bottomLeftCorner(m, k);
    const Eigen::MatrixXd gain = s11.ldlt().solve(s21.transpose()).transpose();
    mean_ = gain * x;
    const Eigen::MatrixXd cov = sigma.bottomRightCorner(m, m) - gain * s21.transpose();
    chol_ = cov.llt().matrixL();
  }

  Eigen::VectorXd draw(std::mt19937_64& gen) const {
    std::normal_distribution<double> nd;
    Eigen::VectorXd g(mean_.size());
    for (auto& v : g) v = nd(gen);
    return mean_ + chol_ * g;
  }

  const Eigen::VectorXd& mean() const { return mean_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_;
};

// Random symmetric matrix with unit diagonal and off-diagonal entries
// uniform on [-eps, eps].
inline Eigen::MatrixXd random_near_identity(int n, double eps, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-eps, eps);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = u(gen);
  return a;
}

struct McResult {
  double value;
  double std_error;
};

inline McResult binomial(std::uint64_t hits, std::uint64_t n) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(n))};
}

}  // namespace oracle
