#include "characters.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "arith.hpp"
#include "errors.hpp"

namespace race {

namespace {

constexpr std::uint32_t kNoLog = std::numeric_limits<std::uint32_t>::max();

Complex rotate_quarter(Complex z, std::uint64_t turns) {
  switch (turns % 4) {
    case 1: return {-z.imag(), z.real()};
    case 2: return {-z.real(), -z.imag()};
    case 3: return {z.imag(), -z.real()};
    default: return z;
  }
}

}  // namespace

Complex unit_root(std::uint64_t num, std::uint64_t den) {
  num %= den;
  const unsigned __int128 four_k = static_cast<unsigned __int128>(num) * 4;
  const auto quadrant = static_cast<std::uint64_t>(four_k / den);
  const auto rem = static_cast<std::uint64_t>(four_k - static_cast<unsigned __int128>(quadrant) * den);
  Complex base;
  if (rem == 0) {
    base = {1.0, 0.0};
  } else if (2 * rem == den) {
    base = {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
  } else if (2 * rem < den) {
    const double t = std::numbers::pi / 2 * (static_cast<double>(rem) / static_cast<double>(den));
    base = {std::cos(t), std::sin(t)};
  } else {
    const double t =
        std::numbers::pi / 2 * (static_cast<double>(den - rem) / static_cast<double>(den));
    base = {std::sin(t), std::cos(t)};
  }
  return rotate_quarter(base, quadrant);
}

CharacterTable::CharacterTable(std::uint64_t q) : q_(q) {
  if (q < 3) throw_domain("character group needs q >= 3, got " + std::to_string(q));
  phi_ = euler_phi(q);

  for (const auto& pp : factorize(q)) {
    if (pp.p == 2) {
      if (pp.e == 1) continue;
      if (pp.e == 2) {
        factors_.push_back({4, 2, 0, {kNoLog, 0, kNoLog, 1}});
        continue;
      }
      // (Z/2^e)* = {±1} × <5>
      const std::uint64_t order5 = pp.pe / 4;
      Factor sign{pp.pe, 2, 0, std::vector<std::uint32_t>(pp.pe, kNoLog)};
      Factor five{pp.pe, order5, 0, std::vector<std::uint32_t>(pp.pe, kNoLog)};
      std::uint64_t g = 1;
      for (std::uint64_t k = 0; k < order5; ++k) {
        sign.log[g] = 0;
        five.log[g] = static_cast<std::uint32_t>(k);
        sign.log[pp.pe - g] = 1;
        five.log[pp.pe - g] = static_cast<std::uint32_t>(k);
        g = g * 5 % pp.pe;
      }
      factors_.push_back(std::move(sign));
      factors_.push_back(std::move(five));
      continue;
    }
    const std::uint64_t order = pp.pe / pp.p * (pp.p - 1);
    const std::uint64_t g = primitive_root(pp.p);
    Factor f{pp.pe, order, 0, std::vector<std::uint32_t>(pp.pe, kNoLog)};
    std::uint64_t x = 1;
    for (std::uint64_t k = 0; k < order; ++k) {
      f.log[x] = static_cast<std::uint32_t>(k);
      x = mulmod(x, g, pp.pe);
    }
    factors_.push_back(std::move(f));
  }

  for (const auto& f : factors_) exponent_ = std::lcm(exponent_, f.order);
  for (auto& f : factors_) f.weight = exponent_ / f.order;
}

bool CharacterTable::is_unit(std::int64_t a) const { return std::gcd(mod(a, q_), q_) == 1; }

std::uint64_t CharacterTable::unit_residue(std::int64_t a) const {
  const std::uint64_t r = mod(a, q_);
  if (std::gcd(r, q_) != 1)
    throw_domain("non-unit residue " + std::to_string(a) + " mod " + std::to_string(q_));
  return r;
}

std::vector<std::uint64_t> CharacterTable::conrey_indices() const { return units(q_); }

std::uint64_t CharacterTable::angle(std::uint64_t conrey_index, std::int64_t a) const {
  const std::uint64_t n = unit_residue(static_cast<std::int64_t>(conrey_index % q_));
  const std::uint64_t m = unit_residue(a);
  std::uint64_t k = 0;
  for (const auto& f : factors_) {
    const std::uint64_t ln = f.log[n % f.modulus];
    const std::uint64_t lm = f.log[m % f.modulus];
    k = (k + f.weight * (mulmod(ln, lm, f.order))) % exponent_;
  }
  return k;
}

Complex CharacterTable::evaluate(std::uint64_t conrey_index, std::int64_t a) const {
  return unit_root(angle(conrey_index, a), exponent_);
}

Character CharacterTable::character(std::uint64_t conrey_index) const {
  unit_residue(static_cast<std::int64_t>(conrey_index % q_));
  std::vector<Complex> values(q_, Complex{0.0, 0.0});
  for (std::uint64_t a : units(q_)) values[a] = evaluate(conrey_index, static_cast<std::int64_t>(a));
  return Character(conrey_index, std::move(values));
}

}  // namespace race
