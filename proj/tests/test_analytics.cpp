#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "analytics.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "gaussian_oracle.hpp"
#include "oracles.hpp"

using namespace race;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Φ in long double from libm, used as the reference for tails.
long double phi_ref(long double x) { return 0.5L * std::erfc(-x / std::sqrt(2.0L)); }

double rel(double got, long double want) { return std::abs((long double)got - want) / std::abs(want); }

BoundParams scalars(std::map<std::string, double> m) {
  BoundParams p;
  p.scalars = std::move(m);
  return p;
}

}  // namespace

TEST_CASE("near identity closed forms") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0.2, 0.2, 1;
  const auto rep = near_identity_analysis(a);
  CHECK(rep.det_exact == doctest::Approx(0.96).epsilon(1e-14));
  CHECK(rep.inv_exact(0, 0) == doctest::Approx(1.0416667).epsilon(1e-7));
  CHECK(rep.inv_exact(0, 1) == doctest::Approx(-0.2083333).epsilon(1e-6));
  CHECK(rep.epsilon == 0.2);

  const auto id = near_identity_analysis(Eigen::MatrixXd::Identity(5, 5));
  CHECK(id.det_exact == 1.0);
  CHECK(id.det_bound_ratio == 0.0);
  CHECK(id.inv_offdiag_ratios.cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK_THROWS_AS(near_identity_analysis(sing), Error);
  a(0, 0) = 1.1;
  CHECK_THROWS_AS(near_identity_analysis(a), Error);
}

TEST_CASE("near identity ratios stay bounded on random members") {
  std::mt19937_64 gen(2024);
  for (int n : {4, 16}) {
    double det_max = 0, inv_max = 0, lu_max = 0, det_err = 0;
    for (int t = 0; t < 500; ++t) {
      const auto a = oracle::random_near_identity(n, 1.0 / (2 * n), gen);
      CHECK(in_near_identity_class(a, 1.0 / (2 * n)));
      const auto rep = near_identity_analysis(a);
      det_max = std::max(det_max, rep.det_bound_ratio);
      inv_max = std::max(inv_max, rep.inv_offdiag_ratios.maxCoeff());
      const Eigen::MatrixXd prod = rep.inv_exact * a;
      lu_max = std::max(lu_max, (prod - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
      // Determinant against the eigenvalue product.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
      det_err = std::max(det_err, std::abs(es.eigenvalues().prod() - rep.det_exact));
    }
    CHECK(det_max <= 3);
    CHECK(inv_max <= 10);
    CHECK(lu_max < 1e-9);
    CHECK(det_err < 1e-12);
  }
}

TEST_CASE("LU self-consistency up to n = 128") {
  std::mt19937_64 gen(5);
  for (int n : {32, 128}) {
    const auto a = oracle::random_near_identity(n, 1.0 / (2 * n), gen);
    const auto rep = near_identity_analysis(a);
    CHECK((rep.inv_exact * a - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("Gaussian density values") {
  CHECK(gaussian_density(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(1 / (2 * M_PI)).epsilon(1e-14));
  CHECK(gaussian_density(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Ones(1)) ==
        doctest::Approx(0.2419707245191434).epsilon(1e-14));
  Eigen::MatrixXd sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK_THROWS_AS(gaussian_density(sing, Eigen::VectorXd::Zero(2)), Error);
}

TEST_CASE("log density agrees with an eigendecomposition") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 7;
    Eigen::MatrixXd g(n, n + 3);
    for (auto& v : g.reshaped()) v = nd(gen);
    const Eigen::MatrixXd c = g * g.transpose() / (n + 3) + 0.05 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x(n);
    for (auto& v : x) v = nd(gen);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    const Eigen::VectorXd y = es.eigenvectors().transpose() * x;
    double want = -0.5 * n * std::log(2 * M_PI);
    for (int i = 0; i < n; ++i)
      want -= 0.5 * std::log(es.eigenvalues()(i)) + 0.5 * y(i) * y(i) / es.eigenvalues()(i);
    CHECK(std::abs(log_gaussian_density(c, x) - want) < 1e-9);
  }
}

TEST_CASE("Gaussian density integrates to one on a 6 sigma box") {
  std::mt19937_64 gen(3);
  for (int n = 1; n <= 3; ++n) {
    const auto c = oracle::random_near_identity(n, 0.4, gen);
    const int m = n == 3 ? 60 : 200;
    const double h = 12.0 / m;
    long double total = 0;
    const int pts = m + 1;
    int count = 1;
    for (int i = 0; i < n; ++i) count *= pts;
    Eigen::VectorXd x(n);
    for (int idx = 0; idx < count; ++idx) {
      int rest = idx;
      long double w = 1;
      for (int d = 0; d < n; ++d) {
        const int i = rest % pts;
        rest /= pts;
        x(d) = -6.0 + i * h;
        w *= (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
      }
      total += w * gaussian_density(c, x);
    }
    total *= std::pow(h / 3.0L, n);
    CHECK(std::abs(total - 1) < 1e-3);
  }
}

TEST_CASE("normal CDF accuracy") {
  CHECK(phi_cdf(0.0) == 0.5);
  CHECK(phi_cdf(40.0) <= 1.0);
  CHECK(phi_cdf(40.0) >= 1.0 - 1e-300);
  CHECK(rel(phi_cdf(1.0), oracle::phi_series(1.0L)) < 1e-12);
  CHECK(std::abs(phi_cdf(1.0) - 0.8413447460685429) < 1e-12);
  for (double x = -5.0; x <= 5.0; x += 0.125) CHECK(rel(phi_cdf(x), oracle::phi_series(x)) < 1e-12);
  for (double x = -37.0; x <= 38.0; x += 0.25) CHECK(rel(phi_cdf(x), phi_ref(x)) < 1e-12);
  for (double x = -140.0; x <= 8.0; x += 0.5) {
    const long double want = x > 0 ? std::log1p(-0.5L * std::erfc(x / std::sqrt(2.0L))) : std::log(phi_ref(x));
    CHECK_MESSAGE(rel(log_phi_cdf(x), want) < 1e-12, "x=" << x);
  }
  CHECK(log_phi_cdf(kInf) == 0.0);
  CHECK(log_phi_cdf(-kInf) == -kInf);
}

TEST_CASE("phi power integral") {
  for (std::uint64_t n : {2ull, 10ull, 100ull}) CHECK(std::abs(phi_power_integral(n, -kInf) - 1.0 / n) < 1e-10);
  for (double a : {-3.0, 0.0, 1.5, 4.0}) CHECK(rel(phi_power_integral(1, a), 1 - phi_ref(a)) < 1e-12);
  CHECK(std::abs(phi_power_integral(100, 2.0) - phi_power_integral_quadrature(100, 2.0)) < 1e-10);
  for (std::uint64_t n : {1ull, 3ull, 50ull, 1000ull})
    for (double a : {-6.0, -1.0, 0.5, 3.0}) {
      const double closed = phi_power_integral(n, a);
      CHECK(std::abs(closed - phi_power_integral_quadrature(n, a)) < 1e-10);
      const long double simpson = oracle::simpson(
          [&](long double t) {
            return std::exp(-t * t / 2) / std::sqrt(2 * M_PIl) * std::pow(phi_ref(t), (long double)(n - 1));
          },
          a, 12.0L, 20000);
      CHECK(std::abs(closed - simpson) < 1e-10);
    }
}

TEST_CASE("NCR2 conditional integral") {
  CHECK(std::abs(ncr2_conditional_integral(5, 1e-8, 1.0) - std::pow(phi_ref(1.0), 5)) < 1e-6);
  for (double eps : {0.01, 0.5, 0.9})
    for (double a : {-1.0, 0.0, 2.0}) CHECK(std::abs(ncr2_conditional_integral(1, eps, a) - phi_ref(a)) < 1e-10);
  const long double want = oracle::simpson(
      [](long double y) {
        const long double e = 0.1L;
        return std::pow(phi_ref((2 + std::sqrt(e) * y) / std::sqrt(1 - e)), 20.0L) * std::exp(-y * y / 2) /
               std::sqrt(2 * M_PIl);
      },
      -12.0L, 12.0L, 20000);
  CHECK(std::abs(ncr2_conditional_integral(20, 0.1, 2.0) - want) < 1e-10);
  CHECK_THROWS_AS(ncr2_conditional_integral(3, 0.0, 1.0), Error);
  CHECK_THROWS_AS(ncr2_conditional_integral(3, 1.0, 1.0), Error);
}

TEST_CASE("NCR2 monotonicity and the Slepian direction") {
  for (double eps : {0.01, 0.1, 0.3}) {
    for (double a = 0.0; a <= 3.0; a += 0.25) {
      double prev = 2.0;
      for (std::uint64_t n = 1; n <= 50; n += 7) {
        const double v = ncr2_conditional_integral(n, eps, a);
        CHECK(v <= prev + 1e-15);
        CHECK(v >= std::pow(phi_cdf(a), double(n)) - 1e-10);
        prev = v;
      }
    }
    for (std::uint64_t n : {2ull, 20ull}) {
      double prev = -1.0;
      for (double a = -2.0; a <= 4.0; a += 0.5) {
        const double v = ncr2_conditional_integral(n, eps, a);
        CHECK(v >= prev - 1e-15);
        prev = v;
      }
    }
  }
}

TEST_CASE("NCR2 integral against sampling the explicit construction") {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd;
  const double eps = 0.1, a = 2.0;
  const std::uint64_t samples = 1000000;
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double z0 = nd(gen);
    bool ok = true;
    for (int i = 0; i < 20; ++i) ok &= std::sqrt(eps) * z0 + std::sqrt(1 - eps) * nd(gen) <= a;
    hits += ok;
  }
  const auto mc = oracle::binomial(hits, samples);
  CHECK(std::abs(ncr2_conditional_integral(20, eps, a) - mc.value) <= 4 * mc.std_error);
}

TEST_CASE("leader conditional product") {
  CHECK(rel(leader_conditional_product({0, 0, 0, 0}, 0.7), std::pow(phi_ref(0.7), 4)) < 1e-12);
  CHECK(leader_conditional_product({0.5}, 1.0) == doctest::Approx(0.7181486).epsilon(1e-6));
  CHECK(rel(leader_conditional_product({0.5}, 1.0), phi_ref(std::sqrt(1.0L / 3))) < 1e-12);
  CHECK_THROWS_AS(leader_conditional_product({0.2, 1.0}, 0.0), Error);
  CHECK_THROWS_AS(leader_conditional_product({-1.0}, 0.0), Error);
}

TEST_CASE("leader product is exact for product-structured correlations") {
  const int n = 4;
  const double r = 0.2, x = 0.8;
  Eigen::MatrixXd sigma(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sigma(i, j) = i == j ? 1.0 : (i == 0 || j == 0) ? r : r * r;
  const oracle::ConditionalGaussian cond(sigma, Eigen::VectorXd::Constant(1, x));
  std::mt19937_64 gen(12);
  const std::uint64_t samples = 400000;
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) hits += cond.draw(gen).maxCoeff() <= x;
  const auto mc = oracle::binomial(hits, samples);
  CHECK(std::abs(leader_conditional_product({r, r, r}, x) - mc.value) <= 4 * mc.std_error);
}

TEST_CASE("first-k transform special cases") {
  Eigen::MatrixXd r(3, 3);
  r << 1, 0.3, -0.2, 0.3, 1, 0.1, -0.2, 0.1, 1;
  Eigen::VectorXd x1(1);
  x1 << 0.9;
  const auto t1 = firstk_transform(r, 1, x1);
  CHECK(t1.u(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(t1.u(1, 0) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(t1.v_var(0) == doctest::Approx(1 - 0.09).epsilon(1e-15));
  CHECK(t1.w(0) == doctest::Approx((0.9 - 0.3 * 0.9) / std::sqrt(0.91)).epsilon(1e-14));
  const double w_lemma = 0.9 * std::sqrt((1 - 0.3) / (1 + 0.3));
  CHECK(t1.w(0) == doctest::Approx(w_lemma).epsilon(1e-14));

  Eigen::VectorXd x2(2);
  x2 << 1.5, 0.5;
  const auto ti = firstk_transform(Eigen::MatrixXd::Identity(5, 5), 2, x2);
  CHECK(ti.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK((ti.w.array() == 0.5).all());
  CHECK(ti.residual_corr == Eigen::MatrixXd::Identity(3, 3));

  Eigen::VectorXd bad(2);
  bad << 0.5, 1.5;
  CHECK_THROWS_AS(firstk_transform(r, 2, bad), Error);
  CHECK_THROWS_AS(firstk_transform(r, 3, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("first-k orthogonality on random near-identity matrices") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    const int n = 5 + t % 20;
    const auto r = oracle::random_near_identity(n, 1.0 / (4 * n), gen);
    const std::size_t k = 1 + t % 4;
    Eigen::VectorXd x(k);
    for (auto& v : x) v = nd(gen);
    std::sort(x.begin(), x.end(), std::greater<>());
    const auto tr = firstk_transform(r, k, x);
    CHECK(orthogonality_residual(r, tr) < 1e-10);
  }
}

TEST_CASE("first-k transform matches conditional sampling") {
  std::mt19937_64 gen(31);
  const int n = 10;
  const auto r = oracle::random_near_identity(n, 1.0 / (4 * n), gen);
  Eigen::VectorXd x(3);
  x << 1.6, 1.1, 0.9;
  const auto tr = firstk_transform(r, 3, x);
  const oracle::ConditionalGaussian cond(r, x);
  const Eigen::MatrixXd lw = tr.residual_corr.llt().matrixL();
  std::normal_distribution<double> nd;
  const std::uint64_t samples = 400000;
  std::uint64_t hits_x = 0, hits_w = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    hits_x += cond.draw(gen).maxCoeff() <= x(2);
    Eigen::VectorXd g(n - 3);
    for (auto& v : g) v = nd(gen);
    hits_w += ((lw * g).array() <= tr.w.array()).all();
  }
  const auto a = oracle::binomial(hits_x, samples), b = oracle::binomial(hits_w, samples);
  CHECK(std::abs(a.value - b.value) <= 4 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("bound evaluators") {
  auto pl = bound_value(BoundKind::ProbLeader, scalars({{"n", 10}, {"r1_sum", 0}, {"rij_sum", 0}}));
  CHECK(pl.value == doctest::Approx(1e-100).epsilon(1e-12));
  const long double want = std::pow(100.0L, -100.0L) + std::pow(100.0L, -1.99L) * 0.1L + std::pow(100.0L, -2.99L);
  auto p2 = bound_value(BoundKind::ProbLeader, scalars({{"n", 100}, {"r1_sum", 0.1}, {"rij_sum", 1}}));
  CHECK(rel(p2.value, want) < 1e-13);
  CHECK(p2.value == doctest::Approx(1.15184e-5).epsilon(1e-5));
  auto p3 = bound_value(BoundKind::ProbLeader, scalars({{"n", 100}, {"r1_sum", 0.1}, {"rij_sum", 1}}), 2.5);
  CHECK(rel(p3.value, 2.5L * want) < 1e-13);
  CHECK_THROWS_WITH_AS(bound_value(BoundKind::ProbLeader, scalars({{"n", 10}, {"r1_sum", 0}})),
                       doctest::Contains("missing parameter 'rij_sum'"), Error);

  auto fr = bound_value(BoundKind::FullRaceError, scalars({{"n", 6}, {"q", 1009}}));
  const long double fr_want = 6 * std::pow(std::log(6.0L), 4) / std::log(1009.0L);
  CHECK(rel(fr.value, fr_want) < 1e-13);
  CHECK(rel(*fr.absolute, fr_want / 720) < 1e-13);

  auto ld = bound_value(BoundKind::LeaderError, scalars({{"n", 5}, {"q", 101}}));
  const long double ld_want = std::pow(5.0L, 4) / std::pow(100.0L, 0.125L) + std::pow(5 * std::log(101.0L), -0.48L);
  CHECK(rel(ld.value, ld_want) < 1e-13);
  CHECK(rel(*ld.absolute, ld_want / 5) < 1e-13);

  auto fk = bound_value(BoundKind::FirstKError, scalars({{"n", 20}, {"k", 3}, {"q", 10007}}));
  const long double lq = std::log(10007.0L);
  const long double fk_want = 3 * std::pow(std::log(3.0L), 6) * std::log(20.0L) / lq + 1 / (20 * std::pow(lq, 0.1L));
  CHECK(rel(fk.value, fk_want) < 1e-13);
  CHECK(rel(*fk.absolute, fk_want / (20 * 19 * 18)) < 1e-12);

  auto nc = bound_value(BoundKind::NCR2, scalars({{"n", 50}, {"epsilon", 0.1}, {"A", 2}, {"B", 0.5}}), 3.0);
  const long double inner = std::exp(-2.0L - (0.4L + 1.0L + 0.25L)) / 2.5L;
  CHECK(rel(nc.value, 3 * (std::exp(-50 * inner) + std::exp(-2.5L))) < 1e-13);
  CHECK(nc.value >= 0);

  BoundParams ls;
  Eigen::MatrixXd m(2, 2);
  m << 1, 0.3, 0.3, 1;
  ls.x_corr = m;
  ls.w_corr = m;
  ls.u = {2, 2};
  CHECK(bound_value(BoundKind::LiShao, ls).value == 0.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(2, 2);
  ls.w_corr = w;
  const long double ls_want = std::asin(0.3L) * std::exp(-8 / (2 * 1.3L)) / (2 * M_PIl);
  CHECK(rel(bound_value(BoundKind::LiShao, ls).value, ls_want) < 1e-13);
  CHECK(rel(bound_value(BoundKind::LiShao, ls, 4.0).value, 4 * ls_want) < 1e-13);

  BoundParams hy;
  hy.w_corr = m;
  hy.u = {1.0, 1.5};
  hy.scalars = {{"epsilon", 0.1}, {"epsilon1", 0.05}, {"w", 2.0}};
  auto h = bound_value(BoundKind::HybridShape, hy, 1.0);
  CHECK(h.shape_only);
  const long double pref = phi_ref(1.0) * phi_ref(1.5) + std::exp(-0.04L / (0.05L + 0.001L));
  CHECK(rel(h.value, pref * 2 * 0.3L * std::exp(-0.5L * (1 + 2.25L))) < 1e-12);

  CHECK(parse_bound_kind("ncr2") == BoundKind::NCR2);
  CHECK_THROWS_AS(parse_bound_kind("nope"), Error);
}

TEST_CASE("delta2 quadrature") {
  for (std::uint64_t n : {3ull, 10ull, 100ull})
    CHECK(std::abs(delta2_quadrature(0.0, n) * n * (n - 1) - 1) < 1e-4);
  CHECK(delta2_quadrature(0.0, 10) == doctest::Approx(1.0 / 90).epsilon(1e-6));
  CHECK(delta2_quadrature(-0.1, 200) * 200 * 199 < 1);
  CHECK(delta2_quadrature(0.1, 20) * 380 > 1);
  CHECK_THROWS_AS(delta2_quadrature(0.1, 2), Error);
  CHECK_THROWS_AS(delta2_quadrature(1.0, 5), Error);
}

TEST_CASE("delta2 quadrature against a one-dimensional reduction") {
  // P(Z1 > Z2 > max_{i>2} Z_i) = ∫ φ(x2) P(Z1 > x2 | x2) Φ(x2)^{n-2} dx2 with
  // Z1 | Z2 = x2 ~ N(r x2, 1 - r²).
  for (double r : {-0.3, -0.1, 0.1, 0.4})
    for (std::uint64_t n : {3ull, 20ull, 200ull}) {
      const long double want = oracle::simpson(
          [&](long double x2) {
            const long double cond = 1 - phi_ref((x2 - r * x2) / std::sqrt(1 - (long double)r * r));
            return std::exp(-x2 * x2 / 2) / std::sqrt(2 * M_PIl) * cond * std::pow(phi_ref(x2), (long double)(n - 2));
          },
          -10.0L, 12.0L, 40000);
      CHECK(std::abs(delta2_quadrature(r, n) - want) < 1e-4 / (n * (n - 1.0)));
    }
}

TEST_CASE("biased tuples") {
  CHECK(biased_tuple(35, 3, 3) == std::vector<std::uint64_t>{1, 34, 6});
  CHECK(biased_tuple(7, 2, 2) == std::vector<std::uint64_t>{1, 6});
  CHECK(biased_tuple(11, 4, 4) == std::vector<std::uint64_t>{1, 10, 7, 9});
  const auto filled = biased_tuple(11, 3, 6);
  CHECK(filled == std::vector<std::uint64_t>{1, 10, 7, 2, 3, 4});
  CHECK_THROWS_WITH_AS(biased_tuple(35, 4, 4), doctest::Contains("construction collides"), Error);
  CHECK_THROWS_AS(biased_tuple(7, 2, 7), Error);
}

TEST_CASE("choose A") {
  CHECK_THROWS_WITH_AS(choose_A(std::exp(1.0), 3.0), doctest::Contains("A undefined in this regime"), Error);
  CHECK(choose_A(1e6, 2) == doctest::Approx(4.5366).epsilon(1e-4));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> un(100, 1e7), uk(1, 5);
  for (int t = 0; t < 200; ++t) {
    const double n = un(gen), k = uk(gen);
    const double a = choose_A(n, k);
    CHECK(std::abs(std::exp(0.51 * a * a) * k * std::log(n) / n - 1) < 1e-12);
  }
}
