#include "analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "arith.hpp"
#include "errors.hpp"
#include "kahan.hpp"
#include "quadrature.hpp"

namespace race {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void require_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw_domain(std::string(what) + " must be a non-empty square matrix");
}

double scalar(const BoundParams& p, const std::string& name, const std::string& kind) {
  const auto it = p.scalars.find(name);
  if (it == p.scalars.end())
    throw_validation("missing parameter '" + name + "' for " + kind);
  return it->second;
}

}  // namespace

// ---- Matrix perturbation -------------------------------------------------

bool in_near_identity_class(const Eigen::MatrixXd& a, double eps) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 1.0) return false;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j && (a(i, j) != a(j, i) || std::abs(a(i, j)) > eps)) return false;
  }
  return true;
}

NearIdentityReport near_identity_analysis(const Eigen::MatrixXd& a) {
  require_square(a, "matrix");
  const Eigen::Index n = a.rows();
  NearIdentityReport rep;
  KahanSum offsum;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i, i) != 1.0) throw_domain("diagonal entries must be exactly 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (a(i, j) != a(j, i)) throw_domain("matrix must be symmetric");
      rep.epsilon = std::max(rep.epsilon, std::abs(a(i, j)));
      offsum += std::abs(a(i, j));
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (!(lu.rcond() > 1e-14)) throw_numeric("matrix is singular");
  rep.det_exact = lu.determinant();
  rep.inv_exact = lu.inverse();

  const double s = offsum.value();
  const double denom = rep.epsilon * s;
  const double dev = std::abs(rep.det_exact - 1.0);
  rep.det_bound_ratio = denom == 0.0 ? (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                     : dev / denom;

  rep.inv_offdiag_ratios = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd abs_a = a.cwiseAbs();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j == k) continue;
      KahanSum two;
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j && i != k) two += abs_a(j, i) * abs_a(i, k);
      const double d = abs_a(j, k) + two.value() + rep.epsilon * rep.epsilon * s;
      const double v = std::abs(rep.inv_exact(j, k));
      rep.inv_offdiag_ratios(j, k) = d == 0.0 ? (v == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                              : v / d;
    }
  }
  return rep;
}

// ---- Gaussian density and Φ ---------------------------------------------

double log_gaussian_density(const Eigen::MatrixXd& c, const Eigen::VectorXd& x) {
  require_square(c, "covariance");
  if (x.size() != c.rows()) throw_domain("dimension mismatch between covariance and point");
  const Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw_numeric("covariance is singular or not positive definite");
  const Eigen::MatrixXd& l = llt.matrixLLT();
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 1e-150)) throw_numeric("covariance is singular");
    logdet_half += std::log(l(i, i));
  }
  const Eigen::VectorXd y = llt.matrixL().solve(x);
  return -static_cast<double>(x.size()) * kLogSqrt2Pi - logdet_half - 0.5 * y.squaredNorm();
}

double gaussian_density(const Eigen::MatrixXd& c, const Eigen::VectorXd& x) {
  return std::exp(log_gaussian_density(c, x));
}

double phi_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double phi_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_phi_cdf(double x) {
  if (std::isinf(x)) return x > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (x < -37.0) {
    // Mills-ratio expansion; the first omitted term is below 1e-13 here.
    const double t = 1.0 / (x * x);
    const double series = 1.0 - t * (1.0 - 3.0 * t * (1.0 - 5.0 * t * (1.0 - 7.0 * t)));
    return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
  }
  if (x < 0.0) return std::log(phi_cdf(x));
  return std::log1p(-phi_sf(x));
}

double phi_power_integral(std::uint64_t n, double a) {
  if (n == 0) throw_domain("n must be at least 1");
  const double dn = static_cast<double>(n);
  if (a == -std::numeric_limits<double>::infinity()) return 1.0 / dn;
  return -std::expm1(dn * log_phi_cdf(a)) / dn;
}

double phi_power_integral_quadrature(std::uint64_t n, double a) {
  if (n == 0) throw_domain("n must be at least 1");
  const double lo = std::max(a, -40.0);
  const double hi = std::max(lo, 0.0) + 40.0;
  const double m = static_cast<double>(n - 1);
  auto f = [m](double t) { return std::exp(-0.5 * t * t - kLogSqrt2Pi + m * log_phi_cdf(t)); };
  return integrate(f, lo, hi, static_cast<int>(std::ceil(hi - lo)));
}

double ncr2_conditional_integral(std::uint64_t n, double epsilon, double a) {
  if (n == 0) throw_domain("n must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw_domain("epsilon must lie in (0, 1)");
  const double se = std::sqrt(epsilon), sc = std::sqrt(1.0 - epsilon), dn = static_cast<double>(n);
  auto f = [&](double y) {
    return std::exp(dn * log_phi_cdf((a + se * y) / sc) - 0.5 * y * y - kLogSqrt2Pi);
  };
  return integrate(f, -40.0, 40.0, 80);
}

double leader_conditional_product(const std::vector<double>& r1, double x) {
  KahanSum log_prod;
  for (double r : r1) {
    if (!(std::abs(r) < 1.0)) throw_domain("correlations must satisfy |r| < 1");
    log_prod += log_phi_cdf(x * std::sqrt((1.0 - r) / (1.0 + r)));
  }
  return std::exp(log_prod.value());
}

// ---- Conditioning on the first k coordinates -----------------------------

ConditioningTransform firstk_transform(const Eigen::MatrixXd& r, std::size_t k,
                                       const Eigen::VectorXd& x) {
  require_square(r, "correlation matrix");
  const Eigen::Index n = r.rows(), kk = static_cast<Eigen::Index>(k);
  if (k < 1 || kk >= n) throw_domain("k must satisfy 1 <= k < n");
  if (x.size() != kk) throw_domain("x must have k entries");
  for (Eigen::Index i = 1; i < kk; ++i)
    if (x(i) > x(i - 1)) throw_domain("x must be nonincreasing");
  const Eigen::MatrixXd lead = r.topLeftCorner(kk, kk);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lead);
  if (!(lu.rcond() > 1e-14)) throw_numeric("leading block is singular");

  ConditioningTransform t;
  t.k = k;
  const Eigen::Index m = n - kk;
  const Eigen::MatrixXd cross = r.bottomLeftCorner(m, kk);  // r_{i,l}, i > k, l <= k
  t.u = lu.solve(cross.transpose()).transpose();
  t.v_var.resize(m);
  t.w.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t.v_var(i) = 1.0 - t.u.row(i).dot(cross.row(i));
    if (!(t.v_var(i) > 0.0)) throw_numeric("conditional variance is not positive");
    t.w(i) = (x(kk - 1) - t.u.row(i).dot(x)) / std::sqrt(t.v_var(i));
  }
  t.residual_corr.resize(m, m);
  const Eigen::MatrixXd rest = r.bottomRightCorner(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      t.residual_corr(i, j) = i == j ? 1.0
                                     : (rest(i, j) - t.u.row(i).dot(cross.row(j))) /
                                           std::sqrt(t.v_var(i) * t.v_var(j));
  return t;
}

double orthogonality_residual(const Eigen::MatrixXd& r, const ConditioningTransform& t) {
  const auto kk = static_cast<Eigen::Index>(t.k);
  const Eigen::Index m = r.rows() - kk;
  const Eigen::MatrixXd resid =
      r.bottomLeftCorner(m, kk) - t.u * r.topLeftCorner(kk, kk);
  return resid.cwiseAbs().maxCoeff();
}

// ---- Error-term evaluators -----------------------------------------------

BoundKind parse_bound_kind(const std::string& name) {
  if (name == "probleader") return BoundKind::ProbLeader;
  if (name == "fullrace") return BoundKind::FullRaceError;
  if (name == "leader") return BoundKind::LeaderError;
  if (name == "firstk") return BoundKind::FirstKError;
  if (name == "ncr2") return BoundKind::NCR2;
  if (name == "lishao") return BoundKind::LiShao;
  if (name == "hybrid") return BoundKind::HybridShape;
  throw_validation("unknown bound kind '" + name + "'");
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::ProbLeader: return "probleader";
    case BoundKind::FullRaceError: return "fullrace";
    case BoundKind::LeaderError: return "leader";
    case BoundKind::FirstKError: return "firstk";
    case BoundKind::NCR2: return "ncr2";
    case BoundKind::LiShao: return "lishao";
    case BoundKind::HybridShape: return "hybrid";
  }
  return "unknown";
}

BoundReport bound_value(BoundKind kind, const BoundParams& params, double c) {
  if (!(c >= 0.0)) throw_domain("constant must be nonnegative");
  BoundReport rep;
  rep.kind = kind;
  rep.inputs = params;
  rep.constant_c = c;
  const std::string name = to_string(kind);
  auto get = [&](const char* key) { return scalar(params, key, name); };
  auto positive_int = [&](const char* key, double min) {
    const double v = get(key);
    if (!(v >= min) || v != std::floor(v))
      throw_domain(std::string(key) + " must be an integer >= " + std::to_string(int(min)));
    return v;
  };
  switch (kind) {
    case BoundKind::ProbLeader: {
      const double n = positive_int("n", 2), s1 = get("r1_sum"), s2 = get("rij_sum");
      if (s1 < 0 || s2 < 0) throw_domain("correlation sums must be nonnegative");
      rep.value = c * (std::pow(n, -100.0) + std::pow(n, -1.99) * s1 + std::pow(n, -2.99) * s2);
      rep.absolute = rep.value;
      break;
    }
    case BoundKind::FullRaceError: {
      const double n = positive_int("n", 2), q = positive_int("q", 3);
      rep.value = c * n * std::pow(std::log(n), 4) / std::log(q);
      rep.absolute = rep.value * std::exp(-std::lgamma(n + 1.0));
      break;
    }
    case BoundKind::LeaderError: {
      const double n = positive_int("n", 2), q = positive_int("q", 3);
      const auto it = params.scalars.find("phi");
      const double phi = it != params.scalars.end()
                             ? it->second
                             : static_cast<double>(euler_phi(static_cast<std::uint64_t>(q)));
      rep.value = c * (std::pow(n, 4) / std::pow(phi, 0.125) + std::pow(n * std::log(q), -0.48));
      rep.absolute = rep.value / n;
      break;
    }
    case BoundKind::FirstKError: {
      const double n = positive_int("n", 3), k = positive_int("k", 1), q = positive_int("q", 3);
      if (k > n) throw_domain("k must not exceed n");
      const double lq = std::log(q);
      rep.value = c * (k * std::pow(std::log(k), 6) * std::log(n) / lq +
                       1.0 / (n * std::pow(lq, 0.1)));
      rep.absolute = rep.value * std::exp(std::lgamma(n - k + 1.0) - std::lgamma(n + 1.0));
      break;
    }
    case BoundKind::NCR2: {
      const double n = positive_int("n", 2), eps = get("epsilon"), a = get("A"), b = get("B");
      if (!(eps > 0.0 && eps < 1.0)) throw_domain("epsilon must lie in (0, 1)");
      if (!(a >= 1.0)) throw_domain("A must be at least 1");
      if (!(b > 0.0)) throw_domain("B must be positive");
      // Θ taken as 1; the O(·) in the exponent takes the sign that enlarges the bound.
      const double inner = std::exp(-0.5 * a * a - (eps * a * a + a * b + b * b)) / (a + b);
      rep.value = c * (std::exp(-n * inner) + std::exp(-b * b / eps));
      rep.absolute = rep.value;
      break;
    }
    case BoundKind::LiShao: {
      if (!params.x_corr || !params.w_corr) throw_validation("missing correlation matrices for lishao");
      const Eigen::MatrixXd& x = *params.x_corr;
      const Eigen::MatrixXd& w = *params.w_corr;
      require_square(x, "X correlation");
      if (w.rows() != x.rows() || w.cols() != x.cols()) throw_domain("X and W must have equal size");
      if (params.u.size() != static_cast<std::size_t>(x.rows()))
        throw_validation("missing thresholds u for lishao");
      KahanSum s;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
          if (!(x(i, j) > w(i, j))) continue;
          const double rho = std::max(std::abs(x(i, j)), std::abs(w(i, j)));
          const double ui = params.u[i], uj = params.u[j];
          s += (std::asin(x(i, j)) - std::asin(w(i, j))) *
               std::exp(-(ui * ui + uj * uj) / (2.0 * (1.0 + rho)));
        }
      rep.value = c * s.value() / (2.0 * std::numbers::pi);
      rep.absolute = rep.value;
      break;
    }
    case BoundKind::HybridShape: {
      if (!params.w_corr) throw_validation("missing correlation matrix for hybrid");
      const Eigen::MatrixXd& w = *params.w_corr;
      require_square(w, "W correlation");
      if (params.u.size() != static_cast<std::size_t>(w.rows()))
        throw_validation("missing thresholds for hybrid");
      const double eps = get("epsilon"), eps1 = get("epsilon1"), wl = get("w");
      KahanSum logprod, s;
      for (std::size_t i = 0; i < params.u.size(); ++i) {
        logprod += log_phi_cdf(params.u[i]);
        for (std::size_t j = 0; j < params.u.size(); ++j)
          if (i != j)
            s += std::abs(w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) *
                 std::exp(-0.5 * (params.u[i] * params.u[i] + params.u[j] * params.u[j]));
      }
      const double prefactor =
          std::exp(logprod.value()) + std::exp(-c * (eps * wl) * (eps * wl) / (eps1 + eps * eps * eps));
      rep.value = prefactor * s.value();
      rep.shape_only = true;
      break;
    }
  }
  return rep;
}

// ---- Bias construction ---------------------------------------------------

double delta2_quadrature(double r12, std::uint64_t n) {
  if (n < 3) throw_domain("n must be at least 3");
  if (!(std::abs(r12) < 1.0)) throw_domain("r12 must lie in (-1, 1)");
  constexpr double lo = -8.0, hi = 12.0;
  const double one_minus = 1.0 - r12 * r12;
  const double log_norm = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(one_minus);
  const double m = static_cast<double>(n - 2);
  auto outer = [&](double x2) {
    const double tail = m * log_phi_cdf(x2);
    auto inner = [&](double x1) {
      const double qf = (x1 * x1 - 2.0 * r12 * x1 * x2 + x2 * x2) / one_minus;
      return std::exp(log_norm - 0.5 * qf + tail);
    };
    return integrate(inner, x2, hi, std::max(1, static_cast<int>(std::ceil((hi - x2) / 2.0))),
                     1e-12);
  };
  return integrate(outer, lo, hi, 20, 1e-11);
}

std::vector<std::uint64_t> biased_tuple(std::uint64_t q, std::uint64_t k, std::uint64_t n) {
  if (q < 3) throw_domain("modulus must be at least 3");
  const std::uint64_t phi = euler_phi(q);
  if (!(2 <= k && k <= n && n <= phi))
    throw_domain("need 2 <= k <= n <= phi(q) = " + std::to_string(phi));
  std::uint64_t p1 = 0, p2 = 0;
  for (std::uint64_t p = 2; p2 == 0; ++p) {
    if (!is_prime(p) || q % p == 0) continue;
    (p1 == 0 ? p1 : p2) = p;
  }
  std::vector<std::uint64_t> tuple{1, q - 1};
  const std::uint64_t base = (p1 * p2) % q;
  for (std::uint64_t j = 3; j <= k; ++j) tuple.push_back(powmod(base, j, q));
  std::set<std::uint64_t> used;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (!used.insert(tuple[i]).second) {
      const auto first = std::find(tuple.begin(), tuple.end(), tuple[i]) - tuple.begin();
      throw_domain("construction collides: a_" + std::to_string(first + 1) + " = a_" +
                   std::to_string(i + 1) + " = " + std::to_string(tuple[i]) + " (mod " +
                   std::to_string(q) + ")");
    }
  }
  for (std::uint64_t a : units(q)) {
    if (tuple.size() == n) break;
    if (used.insert(a).second) tuple.push_back(a);
  }
  return tuple;
}

double choose_A(double n, double k) {
  if (!(n > 1.0) || !(k > 0.0)) throw_domain("A undefined in this regime");
  const double arg = n / (k * std::log(n));
  if (!(arg > 1.0)) throw_domain("A undefined in this regime");
  return std::sqrt(std::log(arg) / 0.51);
}

}  // namespace race
