#include "arith.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "errors.hpp"

namespace race {

bool guards_lifted() {
  const char* v = std::getenv("RACE_GUARD_OVERRIDE");
  return v != nullptr && std::string(v) == "1";
}

std::vector<PrimePower> factorize(std::uint64_t n) {
  std::vector<PrimePower> out;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p != 0) continue;
    PrimePower pp{p, 0, 1};
    while (n % p == 0) {
      n /= p;
      ++pp.e;
      pp.pe *= p;
    }
    out.push_back(pp);
  }
  if (n > 1) out.push_back({n, 1, n});
  return out;
}

std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t phi = n;
  for (const auto& f : factorize(n)) phi = phi / f.p * (f.p - 1);
  return phi;
}

std::uint64_t prime_power_base(std::uint64_t n) {
  if (n < 2) return 0;
  const auto f = factorize(n);
  return f.size() == 1 ? f.front().p : 0;
}

double von_mangoldt(std::uint64_t n) {
  const std::uint64_t p = prime_power_base(n);
  return p == 0 ? 0.0 : std::log(static_cast<double>(p));
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

std::uint64_t mod(std::int64_t a, std::uint64_t m) {
  const auto sm = static_cast<std::int64_t>(m);
  std::int64_t r = a % sm;
  if (r < 0) r += sm;
  return static_cast<std::uint64_t>(r);
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
  std::int64_t old_r = static_cast<std::int64_t>(a % m), r = static_cast<std::int64_t>(m);
  std::int64_t old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t quot = old_r / r;
    old_r -= quot * r;
    std::swap(old_r, r);
    old_s -= quot * s;
    std::swap(old_s, s);
  }
  if (old_r != 1) throw_domain("non-unit residue " + std::to_string(a) + " mod " + std::to_string(m));
  return mod(old_s, m);
}

std::uint64_t primitive_root(std::uint64_t p) {
  const std::uint64_t order = p - 1;
  const auto f = factorize(order);
  const std::uint64_t p2 = p * p;
  for (std::uint64_t g = 2; g < p; ++g) {
    bool ok = true;
    for (const auto& pf : f) {
      if (powmod(g, order / pf.p, p) == 1) {
        ok = false;
        break;
      }
    }
    // A root mod p is a root mod every p^e unless g^(p-1) = 1 mod p^2.
    if (ok && powmod(g, order, p2) != 1) return g;
  }
  return 1;  // p = 2 has the trivial group
}

std::vector<std::uint64_t> units(std::uint64_t q) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t a = 1; a < q; ++a)
    if (std::gcd(a, q) == 1) out.push_back(a);
  return out;
}

}  // namespace race
