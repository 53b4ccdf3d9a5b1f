#include "covariance.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "arith.hpp"
#include "errors.hpp"
#include "kahan.hpp"
#include "primes.hpp"

namespace race {

int cq_shift(std::uint64_t q, std::int64_t a) {
  const std::uint64_t r = mod(a, q);
  if (std::gcd(r, q) != 1) throw_domain("C_q(a) needs a unit, got " + std::to_string(a));
  int roots = 1;
  for (const auto& pp : factorize(q)) {
    const std::uint64_t local = r % pp.pe;
    if (pp.p == 2) {
      if (pp.e == 1) continue;
      if (pp.e == 2) roots *= (local % 4 == 1) ? 2 : 0;
      else roots *= (local % 8 == 1) ? 4 : 0;
    } else {
      // Euler's criterion mod p, Hensel lifts to p^e.
      roots *= powmod(local % pp.p, (pp.p - 1) / 2, pp.p) == 1 ? 2 : 0;
    }
  }
  return roots - 1;
}

double var_q(const ZeroSet& zs) {
  KahanSum sum;
  for (const auto& b : zs.blocks()) sum += b.weight();
  return 2.0 * sum.value();
}

namespace {

// 2 Re χ(a_i) conj χ(a_j), i.e. χ(a_i/a_j) + χ(a_j/a_i).
double pair_term(const Complex& ci, const Complex& cj) {
  return 2.0 * (ci.real() * cj.real() + ci.imag() * cj.imag());
}

void check_same_modulus(const ZeroSet& zs, const CharacterTable& table) {
  if (zs.modulus() != table.modulus())
    throw_domain("zero data is for modulus " + std::to_string(zs.modulus()) +
                 " but the character table is for " + std::to_string(table.modulus()));
}

}  // namespace

double bq(const ZeroSet& zs, const CharacterTable& table, std::int64_t a, std::int64_t b) {
  check_same_modulus(zs, table);
  const std::uint64_t q = table.modulus();
  if (mod(a, q) == mod(b, q)) throw_domain("B_q(a, b) needs a != b mod q");
  KahanSum re, im;
  for (const auto& block : zs.blocks()) {
    const double w = block.weight();
    const Complex ca = table.evaluate(block.conrey_index, a);
    const Complex cb = table.evaluate(block.conrey_index, b);
    const Complex term = cb * std::conj(ca) + ca * std::conj(cb);
    re += w * term.real();
    im += w * term.imag();
  }
  const double result = re.value();
  if (std::abs(im.value()) >= 1e-9 * (std::abs(result) + 1.0))
    throw_numeric("B_q imaginary residual " + std::to_string(im.value()));
  return result;
}

CorrelationMatrix correlation_matrix(const ZeroSet& zs, const CharacterTable& table,
                                     std::span<const std::int64_t> residues) {
  check_same_modulus(zs, table);
  const std::uint64_t q = table.modulus();
  const std::size_t n = residues.size();
  CorrelationMatrix out;
  out.q = q;
  out.partial = !zs.complete();
  for (std::int64_t a : residues) {
    if (!table.is_unit(a)) throw_domain("residue " + std::to_string(a) + " is not a unit");
    const std::uint64_t r = mod(a, q);
    for (std::uint64_t seen : out.residues)
      if (seen == r) throw_domain("duplicate residue " + std::to_string(r));
    out.residues.push_back(r);
  }
  out.var_q = var_q(zs);

  // χ(a_j) per block, then every entry as an independent weighted sum.
  const auto& blocks = zs.blocks();
  std::vector<double> weights;
  std::vector<std::vector<Complex>> values;
  for (const auto& block : blocks) {
    weights.push_back(block.weight());
    auto& row = values.emplace_back();
    for (std::uint64_t a : out.residues)
      row.push_back(table.evaluate(block.conrey_index, static_cast<std::int64_t>(a)));
  }
  out.r = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      KahanSum b;
      for (std::size_t c = 0; c < blocks.size(); ++c)
        b += weights[c] * pair_term(values[c][i], values[c][j]);
      const double rij = b.value() / out.var_q;
      out.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rij;
      out.r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rij;
    }
  }
  return out;
}

CorrelationMatrix correlation_matrix_from(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols() || r.rows() == 0) throw_domain("correlation matrix must be square");
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    if (r(i, i) != 1.0) throw_domain("correlation matrix diagonal must be 1");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(r(i, j) - r(j, i)) > 1e-12) throw_domain("correlation matrix not symmetric");
      if (std::abs(r(i, j)) > 1.0 + 1e-10) throw_domain("correlation entry exceeds 1");
    }
  }
  CorrelationMatrix out;
  out.r = r;
  return out;
}

double lambda_term(std::uint64_t q, std::int64_t a, std::int64_t b) {
  const std::uint64_t diff = mod(a - b, q);
  if (diff == 0) throw_domain("lambda_term needs a != b mod q");
  const std::uint64_t m = q / std::gcd(q, diff);
  const double lam = von_mangoldt(m);
  return lam == 0.0 ? 0.0 : lam / static_cast<double>(euler_phi(m));
}

double m_sum_x(std::uint64_t q) {
  const double lq = static_cast<double>(q) * std::log(static_cast<double>(q));
  return lq * lq;
}

namespace {

void guard_m_sum(std::uint64_t q, bool allow_large) {
  if (q < 3) throw_domain("M sums need q >= 3");
  if (q > 2000 && !allow_large && !guards_lifted())
    throw_guard("cost guard: M sums refuse q > 2000 (set RACE_GUARD_OVERRIDE=1)");
}

}  // namespace

double m1_sum(std::uint64_t q, std::int64_t a, std::int64_t d, bool allow_large) {
  guard_m_sum(q, allow_large);
  const double x = m_sum_x(q);
  const auto limit = static_cast<std::uint64_t>(std::floor(2.0 * x * std::log(x)));
  const std::uint64_t target = mulmod(mod(d, q), invmod(mod(a, q), q), q);
  // Prime powers p^e ≡ target; collect then add in increasing n.
  std::vector<std::pair<std::uint64_t, double>> terms;
  for_each_prime(limit, [&](std::uint64_t p) {
    const double logp = std::log(static_cast<double>(p));
    for (std::uint64_t pe = p;; pe *= p) {
      if (pe % q == target) terms.emplace_back(pe, logp);
      if (pe > limit / p) break;
    }
  });
  std::sort(terms.begin(), terms.end());
  KahanSum sum;
  for (const auto& [n, logp] : terms) {
    const double nd = static_cast<double>(n);
    sum += logp / nd * std::exp(-nd / x);
  }
  return sum.value();
}

double m2_sum(std::uint64_t q, std::int64_t a, std::int64_t d, bool allow_large) {
  guard_m_sum(q, allow_large);
  const double x = m_sum_x(q);
  const auto max_e = static_cast<int>(std::floor(2.0 * std::log(x)));
  KahanSum sum;
  for (const auto& pp : factorize(q)) {
    const std::uint64_t m = q / pp.pe;
    const double logp = std::log(static_cast<double>(pp.p));
    const double pd = static_cast<double>(pp.p);
    for (int e = 1; e <= max_e; ++e) {
      const std::uint64_t lhs = m == 1 ? 0 : mulmod(mod(a, m), powmod(pp.p, e, m), m);
      if (lhs != mod(d, m)) continue;
      sum += logp / (std::pow(pd, e + pp.e - 1) * (pd - 1.0));
    }
  }
  return sum.value();
}

CorrelationAverage correlation_average(const Eigen::MatrixXd& r, std::span<const std::size_t> I,
                                       std::span<const std::size_t> J, double log_q) {
  if (I.empty() || J.empty()) throw_domain("index sets must be nonempty");
  KahanSum sum;
  for (std::size_t i : I)
    for (std::size_t j : J) {
      if (i == j) continue;
      sum += std::abs(r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  CorrelationAverage out;
  out.sum = sum.value();
  const double rs = static_cast<double>(I.size() * J.size());
  const double l = std::log(2.0 * rs);
  out.paper_form = std::sqrt(rs) * l * l / log_q;
  out.ratio = out.sum / out.paper_form;
  return out;
}

CorrelationAverage correlation_average(const CorrelationMatrix& r, std::span<const std::size_t> I,
                                       std::span<const std::size_t> J) {
  if (r.q < 3) throw_domain("correlation_average needs the modulus of the matrix");
  return correlation_average(r.r, I, J, std::log(static_cast<double>(r.q)));
}

}  // namespace race
