#pragma once

// Exact residue arithmetic modulo odd prime powers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "catmap/error.hpp"

namespace catmap {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using cplx = std::complex<double>;

/// Representative of a in [0, m).
inline i64 mod(i128 a, i64 m) {
  i128 r = a % m;
  if (r < 0) r += m;
  return static_cast<i64>(r);
}

inline i64 mul_mod(i64 a, i64 b, i64 m) { return mod(static_cast<i128>(a) * b, m); }

inline i64 pow_mod(i64 base, u64 e, i64 m) {
  i64 result = 1 % m;
  base = mod(base, m);
  while (e > 0) {
    if (e & 1U) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    e >>= 1U;
  }
  return result;
}

inline bool is_prime(i64 n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (i64 d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

/// Distinct prime factors in increasing order.
inline std::vector<i64> prime_factors(i64 n) {
  std::vector<i64> out;
  for (i64 d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// p-adic valuation of a, capped at `cap` (a == 0 yields cap).
inline int valuation(i64 a, i64 p, int cap) {
  if (a == 0) return cap;
  int v = 0;
  while (v < cap && a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

/// The modulus N = p^k for an odd prime p.
class PrimePower {
 public:
  PrimePower(i64 p, int k) : p_(p), k_(k) {
    if (p == 2) fail(ErrorKind::EvenPrime, "p = 2 is not supported");
    if (!is_prime(p)) fail(ErrorKind::NotPrime, std::to_string(p) + " is not prime");
    if (k < 1) fail(ErrorKind::Internal, "exponent must be >= 1");
    i128 n = 1;
    for (int i = 0; i < k; ++i) {
      n *= p;
      if (n > (i128{1} << 40)) fail(ErrorKind::Overflow, "p^k too large");
    }
    n_ = static_cast<i64>(n);
  }

  i64 p() const { return p_; }
  int k() const { return k_; }
  i64 modulus() const { return n_; }

  /// p^l for 0 <= l (not reduced).
  i64 power(int l) const {
    i64 r = 1;
    for (int i = 0; i < l; ++i) r *= p_;
    return r;
  }

  i64 reduce(i128 a) const { return mod(a, n_); }
  bool is_unit(i64 a) const { return mod(a, p_) != 0; }

  friend bool operator==(const PrimePower&, const PrimePower&) = default;

 private:
  i64 p_;
  int k_;
  i64 n_ = 1;
};

/// Inverse of a modulo m; throws NonUnit when gcd(a, m) != 1.
inline i64 inv_mod(i64 a, i64 m) {
  i64 r0 = m, r1 = mod(a, m);
  i64 s0 = 0, s1 = 1;
  while (r1 != 0) {
    const i64 q = r0 / r1;
    i64 tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = s0 - q * s1;
    s0 = s1;
    s1 = tmp;
  }
  if (r0 != 1) fail(ErrorKind::NonUnit, std::to_string(a) + " is not invertible mod " + std::to_string(m));
  return mod(s0, m);
}

inline i64 inv_mod(i64 a, const PrimePower& pp) { return inv_mod(a, pp.modulus()); }

/// Legendre symbol via Euler's criterion.
inline int legendre(i64 a, i64 p) {
  a = mod(a, p);
  if (a == 0) return 0;
  return pow_mod(a, static_cast<u64>((p - 1) / 2), p) == 1 ? 1 : -1;
}

/// Legendre symbol by listing all squares; only meant for small p.
inline int legendre_exhaustive(i64 a, i64 p) {
  a = mod(a, p);
  if (a == 0) return 0;
  for (i64 x = 1; x < p; ++x) {
    if (mul_mod(x, x, p) == a) return 1;
  }
  return -1;
}

/// Tonelli–Shanks. Requires a to be a nonzero quadratic residue mod p.
inline i64 sqrt_mod_prime(i64 a, i64 p) {
  a = mod(a, p);
  if (legendre(a, p) != 1) fail(ErrorKind::Internal, "sqrt_mod_prime: not a nonzero residue");
  if (p % 4 == 3) return pow_mod(a, static_cast<u64>((p + 1) / 4), p);
  i64 q = p - 1;
  int s = 0;
  while (q % 2 == 0) {
    q /= 2;
    ++s;
  }
  i64 z = 2;
  while (legendre(z, p) != -1) ++z;
  i64 m = s;
  i64 c = pow_mod(z, static_cast<u64>(q), p);
  i64 t = pow_mod(a, static_cast<u64>(q), p);
  i64 r = pow_mod(a, static_cast<u64>((q + 1) / 2), p);
  while (t != 1) {
    i64 i = 0;
    i64 t2 = t;
    while (t2 != 1) {
      t2 = mul_mod(t2, t2, p);
      ++i;
    }
    i64 b = c;
    for (i64 j = 0; j < m - i - 1; ++j) b = mul_mod(b, b, p);
    m = i;
    c = mul_mod(b, b, p);
    t = mul_mod(t, c, p);
    r = mul_mod(r, b, p);
  }
  return r;
}

/// Square root of a unit u modulo p^e, lifted from Tonelli–Shanks by Newton steps.
inline i64 sqrt_unit_prime_power(i64 u, i64 p, int e) {
  i64 modulus = 1;
  for (int i = 0; i < e; ++i) modulus *= p;
  i64 x = sqrt_mod_prime(u, p);
  i64 cur = p;
  while (cur < modulus) {
    cur = (cur > modulus / cur) ? modulus : std::min(modulus, cur * cur);
    const i64 fx = mod(static_cast<i128>(x) * x - u, cur);
    x = mod(x - static_cast<i128>(mul_mod(fx, inv_mod(mod(2 * static_cast<i128>(x), cur), cur), cur)), cur);
  }
  return x;
}

/// Sq(nu, p^l) by trying every residue.
inline std::vector<i64> sqrt_set_exhaustive(i64 nu, i64 p, int l) {
  i64 m = 1;
  for (int i = 0; i < l; ++i) m *= p;
  nu = mod(nu, m);
  std::vector<i64> out;
  for (i64 x = 0; x < m; ++x) {
    if (mul_mod(x, x, m) == nu) out.push_back(x);
  }
  return out;
}

/// Sq(nu, p^l) via reduction to the unit case plus Hensel lifting.
inline std::vector<i64> sqrt_set_hensel(i64 nu, i64 p, int l) {
  i64 m = 1;
  for (int i = 0; i < l; ++i) m *= p;
  nu = mod(nu, m);
  std::vector<i64> out;
  if (nu == 0) {
    // x^2 == 0 iff v(x) >= ceil(l/2)
    i64 step = 1;
    for (int i = 0; i < (l + 1) / 2; ++i) step *= p;
    for (i64 x = 0; x < m; x += step) out.push_back(x);
    return out;
  }
  const int a = valuation(nu, p, l);
  if (a % 2 != 0) return out;
  i64 pa = 1;
  for (int i = 0; i < a; ++i) pa *= p;
  const i64 u = nu / pa;
  if (legendre(u, p) != 1) return out;
  const int e = l - a;
  i64 pe = 1;
  for (int i = 0; i < e; ++i) pe *= p;
  i64 half = 1;
  for (int i = 0; i < a / 2; ++i) half *= p;
  const i64 w = sqrt_unit_prime_power(mod(u, pe), p, e);
  for (i64 root : {w, mod(-w, pe)}) {
    for (i64 j = 0; j < half; ++j) {
      out.push_back(mod(static_cast<i128>(half) * (root + j * pe), m));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline constexpr i64 kExhaustiveSqrtLimit = 10000;

/// Sq(nu, p^l) = { x mod p^l : x^2 == nu }, sorted ascending.
inline std::vector<i64> sqrt_set(i64 nu, i64 p, int l) {
  i64 m = 1;
  for (int i = 0; i < l; ++i) m *= p;
  return m <= kExhaustiveSqrtLimit ? sqrt_set_exhaustive(nu, p, l) : sqrt_set_hensel(nu, p, l);
}

/// All x mod p^k with a*x == r (mod p^k).
inline std::vector<i64> solve_linear(i64 a, i64 r, const PrimePower& pp) {
  const i64 n = pp.modulus();
  a = mod(a, n);
  r = mod(r, n);
  const int v = valuation(a, pp.p(), pp.k());
  const i64 pv = pp.power(v);
  std::vector<i64> out;
  if (r % pv != 0) return out;
  const i64 m = n / pv;
  const i64 x0 = (m == 1) ? 0 : mul_mod(r / pv, inv_mod(a / pv, m), m);
  out.reserve(static_cast<std::size_t>(pv));
  for (i64 j = 0; j < pv; ++j) out.push_back(x0 + j * m);
  return out;
}

/// e_N(x) = exp(2 pi i x / N), with x reduced mod N first.
inline cplx unit_root(i64 x, i64 n) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(mod(x, n)) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

/// Cached table of e_N(0..N-1).
class RootTable {
 public:
  explicit RootTable(i64 n) : n_(n), roots_(static_cast<std::size_t>(n)) {
    for (i64 x = 0; x < n; ++x) roots_[static_cast<std::size_t>(x)] = unit_root(x, n);
  }

  i64 order() const { return n_; }
  const cplx& operator()(i64 x) const { return roots_[static_cast<std::size_t>(mod(x, n_))]; }
  /// Lookup for an exponent already in [0, N).
  const cplx& at(i64 reduced) const { return roots_[static_cast<std::size_t>(reduced)]; }

 private:
  i64 n_;
  std::vector<cplx> roots_;
};

/// Sum over y in Z/pZ of e_p(f y^2 + g y), by direct summation.
inline cplx gauss_quadratic(i64 f, i64 g, i64 p) {
  f = mod(f, p);
  g = mod(g, p);
  cplx sum{0.0, 0.0};
  for (i64 y = 0; y < p; ++y) {
    sum += unit_root(mod(static_cast<i128>(f) * y * y + static_cast<i128>(g) * y, p), p);
  }
  return sum;
}

}  // namespace catmap
