#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "characters.hpp"
#include "zeros.hpp"

namespace race {

// C_q(a) = -1 + #{b mod q : b² ≡ a}, from the local square-root counts.
int cq_shift(std::uint64_t q, std::int64_t a);

// Var(q) = 2 Σ_χ Σ_γ 1/(1/4 + γ²) over the (truncated) zero data.
double var_q(const ZeroSet& zs);

// B_q(a, b) = Σ_χ Σ_γ (χ(b/a) + χ(a/b))/(1/4 + γ²).
double bq(const ZeroSet& zs, const CharacterTable& table, std::int64_t a, std::int64_t b);

// Normalized covariances r = B_q/Var(q) of the model vector for a residue tuple.
struct CorrelationMatrix {
  std::uint64_t q = 0;                  // 0 for matrices not built from zeros
  std::vector<std::uint64_t> residues;  // empty for matrices not built from zeros
  double var_q = 0.0;
  bool partial = false;  // zero data did not cover every non-principal character
  Eigen::MatrixXd r;

  std::size_t size() const { return static_cast<std::size_t>(r.rows()); }
};

CorrelationMatrix correlation_matrix(const ZeroSet& zs, const CharacterTable& table,
                                     std::span<const std::int64_t> residues);

// Wraps an explicit matrix after checking unit diagonal, symmetry and
// |r_ij| <= 1.
CorrelationMatrix correlation_matrix_from(const Eigen::MatrixXd& r);

// Λ(m)/φ(m) with m = q/gcd(q, a-b).
double lambda_term(std::uint64_t q, std::int64_t a, std::int64_t b);

// Σ_{n <= 2x log x, an ≡ d (mod q)} Λ(n)/n e^{-n/x} with x = (q log q)².
// Refuses q > 2000 unless guards are lifted.
double m1_sum(std::uint64_t q, std::int64_t a, std::int64_t d, bool allow_large = false);

// Σ_{p^ν || q} Σ_{1 <= e <= 2 log x, a p^e ≡ d mod q/p^ν} log p/(p^{e+ν-1}(p-1)).
double m2_sum(std::uint64_t q, std::int64_t a, std::int64_t d, bool allow_large = false);

// x = (q log q)², shared by m1_sum and m2_sum.
double m_sum_x(std::uint64_t q);

struct CorrelationAverage {
  double sum = 0.0;         // Σ_{i∈I, j∈J, a_i≠a_j} |r_ij|
  double paper_form = 0.0;  // √(|I||J|) log²(2|I||J|) / log q
  double ratio = 0.0;
};

// Index sets refer to positions in the matrix; pairs with i == j are skipped.
CorrelationAverage correlation_average(const Eigen::MatrixXd& r, std::span<const std::size_t> I,
                                       std::span<const std::size_t> J, double log_q);
CorrelationAverage correlation_average(const CorrelationMatrix& r, std::span<const std::size_t> I,
                                       std::span<const std::size_t> J);

}  // namespace race
