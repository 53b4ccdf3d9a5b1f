#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace race {

using Complex = std::complex<double>;

// exp(2πi·num/den), exact at quarter turns and exactly conjugate-symmetric:
// unit_root(den - k, den) == conj(unit_root(k, den)) bit for bit.
Complex unit_root(std::uint64_t num, std::uint64_t den);

// A single materialized character: values indexed by residue 0..q-1, zero off
// the units.
class Character {
 public:
  Character(std::uint64_t conrey_index, std::vector<Complex> values)
      : index_(conrey_index), values_(std::move(values)) {}

  std::uint64_t conrey_index() const { return index_; }
  std::uint64_t modulus() const { return values_.size(); }
  const Complex& operator()(std::uint64_t a) const { return values_[a % values_.size()]; }

 private:
  std::uint64_t index_;
  std::vector<Complex> values_;
};

// The group of Dirichlet characters mod q under the Conrey labeling. The table
// stores discrete-log data for the cyclic factors of (Z/qZ)*; individual
// characters are materialized on request.
class CharacterTable {
 public:
  // Throws a domain error for q < 3.
  explicit CharacterTable(std::uint64_t q);

  std::uint64_t modulus() const { return q_; }
  std::uint64_t size() const { return phi_; }  // φ(q)
  // Exponent of (Z/qZ)*: every value is a root of unity of this order.
  std::uint64_t exponent() const { return exponent_; }

  bool is_unit(std::int64_t a) const;
  // All Conrey indices (the units mod q) in increasing order; 1 is principal.
  std::vector<std::uint64_t> conrey_indices() const;

  // χ_index(a) as the exact rational angle k with χ(a) = exp(2πi k/exponent()).
  std::uint64_t angle(std::uint64_t conrey_index, std::int64_t a) const;
  // χ_index(a). Throws a domain error ("non-unit residue") unless both the
  // index and a are units mod q.
  Complex evaluate(std::uint64_t conrey_index, std::int64_t a) const;
  Character character(std::uint64_t conrey_index) const;

 private:
  struct Factor {
    std::uint64_t modulus;  // prime power p^e this factor lives in
    std::uint64_t order;
    std::uint64_t weight;   // exponent_ / order
    std::vector<std::uint32_t> log;  // discrete log by residue mod `modulus`
  };

  std::uint64_t unit_residue(std::int64_t a) const;

  std::uint64_t q_;
  std::uint64_t phi_;
  std::uint64_t exponent_ = 1;
  std::vector<Factor> factors_;
};

}  // namespace race
