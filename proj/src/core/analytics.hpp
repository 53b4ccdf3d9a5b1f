#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace race {

// ---- Matrix perturbation -------------------------------------------------

struct NearIdentityReport {
  double epsilon = 0.0;  // max |a_jk|, j != k
  double det_exact = 0.0;
  Eigen::MatrixXd inv_exact;
  double det_bound_ratio = 0.0;
  Eigen::MatrixXd inv_offdiag_ratios;  // zero on the diagonal
};

// Symmetric, unit diagonal. Determinant and inverse by LU with partial
// pivoting; the ratios compare them with the first-order perturbative shapes.
NearIdentityReport near_identity_analysis(const Eigen::MatrixXd& a);

// Membership in M_n(eps): symmetric, unit diagonal, |a_jk| <= eps off it.
bool in_near_identity_class(const Eigen::MatrixXd& a, double eps);

// ---- Gaussian density and Φ ---------------------------------------------

double gaussian_density(const Eigen::MatrixXd& c, const Eigen::VectorXd& x);
double log_gaussian_density(const Eigen::MatrixXd& c, const Eigen::VectorXd& x);

double phi_pdf(double x);
double phi_cdf(double x);
double phi_sf(double x);  // 1 - Φ(x) without cancellation
double log_phi_cdf(double x);

// ∫_a^∞ φ(t)Φ(t)^{n-1} dt = (1 - Φ(a)^n)/n. a = -inf gives 1/n.
double phi_power_integral(std::uint64_t n, double a);
// The same integral by adaptive quadrature.
double phi_power_integral_quadrature(std::uint64_t n, double a);

// P(max_i W_i <= A) for W_i = √ε Z_0 + √(1-ε) Z_i, i = 1..n.
double ncr2_conditional_integral(std::uint64_t n, double epsilon, double a);

// Π_i Φ(x √((1 - r_i)/(1 + r_i))).
double leader_conditional_product(const std::vector<double>& r1, double x);

// ---- Conditioning on the first k coordinates -----------------------------

struct ConditioningTransform {
  std::size_t k = 0;
  Eigen::MatrixXd u;         // (n-k) x k
  Eigen::VectorXd v_var;     // E V_i²
  Eigen::VectorXd w;         // thresholds given x_1..x_k
  Eigen::MatrixXd residual_corr;
};

ConditioningTransform firstk_transform(const Eigen::MatrixXd& r, std::size_t k,
                                       const Eigen::VectorXd& x);

// max_{i,t} |r_{i,t} - Σ_l u_{i,l} r_{l,t}| over conditioned t.
double orthogonality_residual(const Eigen::MatrixXd& r, const ConditioningTransform& t);

// ---- Error-term evaluators -----------------------------------------------

enum class BoundKind { ProbLeader, FullRaceError, LeaderError, FirstKError, NCR2, LiShao, HybridShape };

struct BoundParams {
  std::map<std::string, double> scalars;
  // LiShao: correlation matrices of X and W and thresholds u.
  // HybridShape: w_corr and thresholds u (the w_i).
  std::optional<Eigen::MatrixXd> x_corr;
  std::optional<Eigen::MatrixXd> w_corr;
  std::vector<double> u;
};

struct BoundReport {
  BoundKind kind = BoundKind::ProbLeader;
  BoundParams inputs;
  double value = 0.0;
  // Relative bounds are also reported multiplied by the symmetric prediction.
  std::optional<double> absolute;
  double constant_c = 1.0;
  bool shape_only = false;  // not linear in constant_c
};

BoundKind parse_bound_kind(const std::string& name);
std::string to_string(BoundKind kind);

// Scalar parameters by kind:
//   ProbLeader     n, r1_sum, rij_sum
//   FullRaceError  n, q
//   LeaderError    n, q, phi (phi defaults to φ(q))
//   FirstKError    n, k, q
//   NCR2           n, epsilon, A, B
//   LiShao         (matrices and u only)
//   HybridShape    epsilon, epsilon1, w
BoundReport bound_value(BoundKind kind, const BoundParams& params, double constant_c = 1.0);

// ---- Bias construction ---------------------------------------------------

// δ₂ for n standard Gaussians with only r_12 nonzero: P(Z_1 > Z_2 > max_{i>2} Z_i).
double delta2_quadrature(double r12, std::uint64_t n);

std::vector<std::uint64_t> biased_tuple(std::uint64_t q, std::uint64_t k, std::uint64_t n);

// A with e^{0.51 A²} = n/(k log n).
double choose_A(double n, double k);

}  // namespace race
