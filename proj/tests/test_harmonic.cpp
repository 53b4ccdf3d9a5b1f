#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "harmonic.hpp"
#include "oracles.hpp"

using namespace race;

namespace {

// Direct double sum over q <= Q and a = 0..q-1 with the circle distance.
long double g_oracle(long double theta, std::uint64_t Q, long double x) {
  long double s = 0;
  for (std::uint64_t q = 1; q <= Q; ++q) {
    const long double lam = oracle::von_mangoldt(q);
    if (lam == 0) continue;
    for (std::uint64_t a = 0; a < q; ++a) {
      long double d = std::fmod(std::fabs(theta - (long double)a / q), 1.0L);
      d = std::min(d, 1 - d);
      if (d <= 1 / x) s += lam / q;
    }
  }
  return s;
}

std::vector<double> grid(int n, double offset) {
  std::vector<double> p;
  for (int i = 0; i < n; ++i) p.push_back(std::fmod(offset + double(i) / n, 1.0));
  return p;
}

}  // namespace

TEST_CASE("G at hand values") {
  CHECK(std::abs(g_function(0.5, 3, 100) - std::log(2.0) / 2) < 1e-12);
  const double zero_all = std::log(2.0) / 2 + std::log(3.0) / 3 + std::log(2.0) / 4;
  CHECK(std::abs(g_function(0.0, 4, 1e6) - zero_all) < 1e-12);
  CHECK(std::abs(g_function(0.0, 4, 1e6) - 0.88606448164) < 1e-10);
  const double golden = (std::sqrt(5.0) - 1) / 2;
  CHECK(g_function(golden, 10, 1e6) == 0.0);
  CHECK_THROWS_AS(g_function(0.1, 10, 20), Error);
}

TEST_CASE("G against the direct double sum") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 300; ++t) {
    const std::uint64_t Q = 1 + t % 40;
    const double x = 2.5 * Q + t * 7.0;
    // Points close to rationals so that the indicator fires often.
    double theta = u(gen);
    if (t % 2) theta = std::round(theta * (1 + t % 7)) / (1 + t % 7) + 0.3 / x;
    CHECK_MESSAGE(std::abs(g_function(theta, Q, x) - (double)g_oracle(theta, Q, x)) < 1e-12,
                  "theta=" << theta << " Q=" << Q << " x=" << x);
  }
}

TEST_CASE("G symmetries are exact") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0, 1);
  const GFunction g(60, 1000);
  for (int t = 0; t < 2000; ++t) {
    const double theta = t % 3 ? u(gen) : std::round(u(gen) * 12) / 12 + 0.0004;
    CHECK(g(theta) == g(-theta));
    CHECK(g(theta) == g(theta + 1));
  }
}

TEST_CASE("spaced point sets") {
  CHECK(SpacedPoints({0.1, 0.5}, 10).spacing() == doctest::Approx(0.4));
  CHECK(SpacedPoints({0.05, 0.95}, 10).spacing() == doctest::Approx(0.1));
  CHECK_THROWS_AS(SpacedPoints({0.1, 0.15}, 10), Error);
  CHECK_THROWS_AS(SpacedPoints({0.01, 0.99}, 10), Error);
  CHECK_THROWS_AS(SpacedPoints({1.0}, 10), Error);
  CHECK(std::isinf(SpacedPoints({0.3}, 10).spacing()));
}

TEST_CASE("pair sums") {
  const double golden = (std::sqrt(5.0) - 1) / 2;
  const auto empty = pair_sum_report(SpacedPoints({golden}, 1e6), SpacedPoints({0.0}, 1e6), 10, 1e6);
  CHECK(empty.sum == 0.0);

  const SpacedPoints th(grid(30, 0), 1e5), ph(grid(30, 0), 1e5);
  const auto rep = pair_sum_report(th, ph, 50, 1e5);
  CHECK(rep.ratio <= 5);
  long double direct = 0;
  for (double a : th.points())
    for (double b : ph.points()) direct += g_function(a - b, 50, 1e5);
  CHECK(std::abs(rep.sum - (double)direct) < 1e-9);
  const double l = std::log(2.0 * 50 * 900);
  CHECK(rep.paper_form == doctest::Approx(30 * l * l + 900 * 50 / 1e5).epsilon(1e-14));

  CHECK_THROWS_AS(pair_sum_report(SpacedPoints({0.1, 0.2}, 10), SpacedPoints({0.0}, 10), 2, 5.0), Error);
}

TEST_CASE("pair sums are monotone in x and Q") {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 10; ++t) {
    const SpacedPoints th(grid(12 + t, u(gen)), 1e3), ph(grid(9 + t, u(gen)), 1e3);
    double prev = INFINITY;
    for (double x = 1e3; x <= 1.6e4; x *= 2) {
      const double s = pair_sum_report(th, ph, 40, x).sum;
      CHECK(s <= prev);
      prev = s;
    }
    prev = -1;
    for (std::uint64_t Q = 1; Q <= 400; Q += 37) {
      const double s = pair_sum_report(th, ph, Q, 1e3).sum;
      CHECK(s >= prev);
      prev = s;
    }
  }
}
