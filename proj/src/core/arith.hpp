#pragma once

#include <cstdint>
#include <vector>

namespace race {

struct PrimePower {
  std::uint64_t p;
  int e;
  std::uint64_t pe;  // p^e
};

// Prime factorization by trial division, primes in increasing order.
std::vector<PrimePower> factorize(std::uint64_t n);

std::uint64_t euler_phi(std::uint64_t n);

// Λ(n): log p when n = p^e (e >= 1), zero otherwise (including n = 1).
double von_mangoldt(std::uint64_t n);

// If n is a prime power p^e returns p, else 0.
std::uint64_t prime_power_base(std::uint64_t n);

bool is_prime(std::uint64_t n);

// Least nonnegative residue of a mod m.
std::uint64_t mod(std::int64_t a, std::uint64_t m);

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

// Inverse of a modulo m; throws a domain error when gcd(a, m) > 1.
std::uint64_t invmod(std::uint64_t a, std::uint64_t m);

// Smallest g that generates (Z/p^e Z)* for every e (odd prime p).
std::uint64_t primitive_root(std::uint64_t p);

// Units modulo q in increasing order.
std::vector<std::uint64_t> units(std::uint64_t q);

}  // namespace race
