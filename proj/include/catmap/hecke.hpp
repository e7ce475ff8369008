#pragma once

// The order Z[alpha] with alpha^2 = t alpha - 1, the norm-one group C(p^k),
// its characters, and the decomposition of H_N into joint Hecke eigenspaces.

#include <complex>
#ifndef lapack_complex_double
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "catmap/error.hpp"
#include "catmap/modarith.hpp"
#include "catmap/quantization.hpp"

namespace catmap {

enum class PrimeKind { Split, Inert };

inline const char* to_string(PrimeKind kind) { return kind == PrimeKind::Split ? "split" : "inert"; }

/// Split iff D is a nonzero square mod p.
inline PrimeKind classify_prime(const TorusAutomorphism& a, i64 p) {
  if (p == 2) fail(ErrorKind::EvenPrime, "p = 2 is not supported");
  if (!is_prime(p)) fail(ErrorKind::NotPrime, std::to_string(p) + " is not prime");
  const int s = legendre(a.discriminant(), p);
  if (s == 0) fail(ErrorKind::Ramified, std::to_string(p) + " divides D = " + std::to_string(a.discriminant()));
  return s == 1 ? PrimeKind::Split : PrimeKind::Inert;
}

/// a + b alpha.
struct OrderElement {
  i64 a = 0;
  i64 b = 0;
  friend bool operator==(const OrderElement&, const OrderElement&) = default;
};

/// Arithmetic in Z[alpha] / N.
class OrderRing {
 public:
  OrderRing(i64 t, i64 n) : t_(mod(t, n)), n_(n) {}

  i64 modulus() const { return n_; }
  i64 trace() const { return t_; }

  OrderElement make(i128 a, i128 b) const { return {mod(a, n_), mod(b, n_)}; }
  OrderElement one() const { return make(1, 0); }
  /// sqrt(D) = 2 alpha - t.
  OrderElement sqrt_d() const { return make(-static_cast<i128>(t_), 2); }

  OrderElement add(const OrderElement& x, const OrderElement& y) const { return make(static_cast<i128>(x.a) + y.a, static_cast<i128>(x.b) + y.b); }
  OrderElement sub(const OrderElement& x, const OrderElement& y) const { return make(static_cast<i128>(x.a) - y.a, static_cast<i128>(x.b) - y.b); }
  OrderElement scale(const OrderElement& x, i64 s) const { return make(static_cast<i128>(x.a) * s, static_cast<i128>(x.b) * s); }

  OrderElement mul(const OrderElement& x, const OrderElement& y) const {
    const i64 bb = mul_mod(x.b, y.b, n_);
    return make(static_cast<i128>(x.a) * y.a - bb,
                static_cast<i128>(x.a) * y.b + static_cast<i128>(x.b) * y.a + static_cast<i128>(t_) * bb);
  }

  /// a^2 + a b t + b^2.
  i64 norm(const OrderElement& x) const {
    return mod(static_cast<i128>(x.a) * x.a + static_cast<i128>(mul_mod(x.a, x.b, n_)) * t_ + static_cast<i128>(x.b) * x.b, n_);
  }

  OrderElement conj(const OrderElement& x) const { return make(static_cast<i128>(x.a) + static_cast<i128>(x.b) * t_, -static_cast<i128>(x.b)); }

  OrderElement inverse(const OrderElement& x) const {
    const i64 ni = inv_mod(norm(x), n_);
    return scale(conj(x), ni);
  }

  OrderElement pow(OrderElement x, u64 e) const {
    OrderElement r = one();
    while (e > 0) {
      if (e & 1U) r = mul(r, x);
      x = mul(x, x);
      e >>= 1U;
    }
    return r;
  }

 private:
  i64 t_;
  i64 n_;
};

/// C(p^k) = { beta : norm(beta) = 1 }, stored as powers of a generator.
class HeckeGroup {
 public:
  HeckeGroup(TorusAutomorphism a, PrimePower pp, PrimeKind kind, OrderElement generator, std::vector<OrderElement> powers)
      : a_(a), pp_(pp), kind_(kind), ring_(a.trace(), pp.modulus()), gen_(generator), powers_(std::move(powers)) {
    dlog_.reserve(powers_.size());
    for (std::size_t m = 0; m < powers_.size(); ++m) dlog_.emplace(key(powers_[m]), static_cast<i64>(m));
    if (dlog_.size() != powers_.size()) fail(ErrorKind::Internal, "generator powers repeat");
  }

  const TorusAutomorphism& automorphism() const { return a_; }
  const PrimePower& prime_power() const { return pp_; }
  PrimeKind kind() const { return kind_; }
  const OrderRing& ring() const { return ring_; }
  const OrderElement& generator() const { return gen_; }
  i64 order() const { return static_cast<i64>(powers_.size()); }

  /// g^m.
  const OrderElement& element(i64 m) const { return powers_[static_cast<std::size_t>(mod(m, order()))]; }
  const std::vector<OrderElement>& elements() const { return powers_; }

  bool contains(const OrderElement& x) const { return dlog_.contains(key(x)); }

  i64 dlog(const OrderElement& x) const {
    auto it = dlog_.find(key(x));
    if (it == dlog_.end()) fail(ErrorKind::Internal, "element not in C(N)");
    return it->second;
  }

 private:
  i64 key(const OrderElement& x) const { return x.a * pp_.modulus() + x.b; }

  TorusAutomorphism a_;
  PrimePower pp_;
  PrimeKind kind_;
  OrderRing ring_;
  OrderElement gen_;
  std::vector<OrderElement> powers_;
  std::unordered_map<i64, i64> dlog_;
};

/// Theoretical |C(p^k)|.
inline i64 hecke_order(const PrimePower& pp, PrimeKind kind) {
  return pp.power(pp.k() - 1) * (kind == PrimeKind::Split ? pp.p() - 1 : pp.p() + 1);
}

/// All norm-one elements, obtained by solving the norm equation for a at each b.
inline std::vector<OrderElement> enumerate_norm_one(const OrderRing& ring, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const i64 t = ring.trace();
  const i64 d = mod(static_cast<i128>(t) * t - 4, N);
  const i64 half = inv_mod(2, N);
  std::vector<OrderElement> out;
  for (i64 b = 0; b < N; ++b) {
    // a^2 + t b a + b^2 - 1 = 0  =>  a = (r - t b) / 2 with r^2 = D b^2 + 4
    const i64 disc = mod(static_cast<i128>(mul_mod(b, b, N)) * d + 4, N);
    for (i64 r : sqrt_set_hensel(disc, pp.p(), pp.k())) {
      out.push_back({mul_mod(mod(static_cast<i128>(r) - static_cast<i128>(t) * b, N), half, N), b});
    }
  }
  return out;
}

inline HeckeGroup build_group(const TorusAutomorphism& a, const PrimePower& pp) {
  const PrimeKind kind = classify_prime(a, pp.p());
  const OrderRing ring(a.trace(), pp.modulus());
  const auto elements = enumerate_norm_one(ring, pp);
  const i64 order = static_cast<i64>(elements.size());
  if (order != hecke_order(pp, kind)) fail(ErrorKind::Internal, "norm-one group has unexpected size");

  const auto primes = prime_factors(order);
  auto has_full_order = [&](const OrderElement& x) {
    if (ring.pow(x, static_cast<u64>(order)) != ring.one()) return false;
    for (i64 q : primes) {
      if (ring.pow(x, static_cast<u64>(order / q)) == ring.one()) return false;
    }
    return true;
  };

  std::optional<OrderElement> gen;
  std::mt19937_64 rng(0x5eedULL + static_cast<u64>(pp.modulus()));
  std::uniform_int_distribution<std::size_t> pick(0, elements.size() - 1);
  for (int attempt = 0; attempt < 64 && !gen; ++attempt) {
    const auto& x = elements[pick(rng)];
    if (has_full_order(x)) gen = x;
  }
  for (std::size_t i = 0; i < elements.size() && !gen; ++i) {
    if (has_full_order(elements[i])) gen = elements[i];
  }
  if (!gen) fail(ErrorKind::Internal, "C(N) has no generator");

  std::vector<OrderElement> powers;
  powers.reserve(static_cast<std::size_t>(order));
  OrderElement x = ring.one();
  for (i64 m = 0; m < order; ++m) {
    powers.push_back(x);
    x = ring.mul(x, *gen);
  }
  return {a, pp, kind, *gen, std::move(powers)};
}

/// iota(a + b alpha) = a I + b A.
inline Mat2 iota(const OrderElement& beta, const TorusAutomorphism& a, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const Mat2& m = a.matrix();
  return Mat2{static_cast<i64>(beta.a + static_cast<i128>(beta.b) * m.a), static_cast<i64>(static_cast<i128>(beta.b) * m.b),
              static_cast<i64>(static_cast<i128>(beta.b) * m.c), static_cast<i64>(beta.a + static_cast<i128>(beta.b) * m.d)}
      .reduced(N);
}

/// beta(x) = (sqrt(D) x + 1) / (sqrt(D) x - 1).
inline OrderElement beta_of_x(i64 x, const OrderRing& ring, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const i64 t = ring.trace();
  const i64 d = mod(static_cast<i128>(t) * t - 4, N);
  if (mod(static_cast<i128>(d) * mul_mod(x, x, N) - 1, pp.p()) == 0)
    fail(ErrorKind::SingularPoint, "D x^2 = 1 mod p at x = " + std::to_string(x));
  const OrderElement num = ring.make(1 - static_cast<i128>(t) * x, 2 * static_cast<i128>(x));
  const OrderElement den = ring.make(-static_cast<i128>(t) * x - 1, 2 * static_cast<i128>(x));
  return ring.mul(num, ring.inverse(den));
}

/// Inverse of beta_of_x: x = (1 + beta) / (sqrt(D) (beta - 1)).
inline i64 x_of_beta(const OrderElement& beta, const OrderRing& ring, const PrimePower& pp) {
  const OrderElement den = ring.mul(ring.sqrt_d(), ring.sub(beta, ring.one()));
  if (!pp.is_unit(ring.norm(den))) fail(ErrorKind::SingularPoint, "beta is congruent to 1 mod p");
  const OrderElement x = ring.mul(ring.add(ring.one(), beta), ring.inverse(den));
  if (x.b != 0) fail(ErrorKind::Internal, "x_of_beta produced a non-scalar");
  return x.a;
}

/// Largest l <= k with beta = 1 mod p^l.
inline int congruence_level(const OrderElement& beta, const PrimePower& pp) {
  return std::min(valuation(mod(beta.a - 1, pp.modulus()), pp.p(), pp.k()), valuation(beta.b, pp.p(), pp.k()));
}

/// beta in C_p(k, l).
inline bool in_subgroup(const OrderElement& beta, const PrimePower& pp, int l) { return congruence_level(beta, pp) >= l; }

/// Least l with chi_j trivial on C_p(k, l); 0 only for the trivial character.
inline int character_level(i64 index, const PrimePower& pp) {
  if (index == 0) return 0;
  return pp.k() - std::min(valuation(index, pp.p(), pp.k()), pp.k() - 1);
}

/// Character chi_j(g^m) = e(j m / |C|), kept as the exact exponent j m mod |C|.
class HeckeCharacter {
 public:
  HeckeCharacter(const HeckeGroup& group, i64 index) : group_(&group), index_(mod(index, group.order())) {}

  const HeckeGroup& group() const { return *group_; }
  i64 index() const { return index_; }

  i64 exponent(const OrderElement& beta) const { return mul_mod(index_, group_->dlog(beta), group_->order()); }
  cplx operator()(const OrderElement& beta) const { return unit_root(exponent(beta), group_->order()); }

  HeckeCharacter operator*(const HeckeCharacter& other) const { return {*group_, index_ + other.index_}; }

  int level() const { return character_level(index_, group_->prime_power()); }

  bool trivial_on(int l) const { return level() <= l; }

 private:
  const HeckeGroup* group_;
  i64 index_;
};

/// t_chi together with the modulus it lives in (p^l for k = 2l, p^{l+1} for k = 2l + 1).
struct TChi {
  i64 value = 0;
  i64 modulus = 1;
};

/// 1 + p^l sqrt(D) x (+ p^{2l} (D/2) x^2 when k is odd).
inline OrderElement principal_unit(const HeckeGroup& group, i64 x) {
  const PrimePower& pp = group.prime_power();
  const OrderRing& ring = group.ring();
  const int l = pp.k() / 2;
  const i64 N = pp.modulus();
  OrderElement g = ring.add(ring.one(), ring.scale(ring.sqrt_d(), mul_mod(pp.power(l), mod(x, N), N)));
  if (pp.k() % 2 == 1) {
    const i64 d = mod(static_cast<i128>(ring.trace()) * ring.trace() - 4, N);
    const i64 quad = mul_mod(mul_mod(mul_mod(pp.power(2 * l) % N, d, N), inv_mod(2, N), N), mul_mod(x, x, N), N);
    g = ring.add(g, ring.make(quad, 0));
  }
  return g;
}

inline TChi t_chi(const HeckeCharacter& chi) {
  const HeckeGroup& group = chi.group();
  const PrimePower& pp = group.prime_power();
  if (pp.k() < 2) fail(ErrorKind::KTooSmall, "t_chi needs k >= 2");
  const int l = pp.k() / 2;
  const i64 modulus = pp.power(pp.k() % 2 == 0 ? l : l + 1);
  const i64 m = group.dlog(principal_unit(group, 1));
  const i64 q = group.order() / modulus;
  if (m % q != 0) fail(ErrorKind::Internal, "principal unit has wrong order");
  return {mul_mod(chi.index(), m / q, modulus), modulus};
}

/// M in SL(2, Z/p^k) with M^{-1} A M = diag(y, 1/y).
struct SplitDiagonalizer {
  Mat2 m;
  i64 y = 0;
  PrimePower pp;

  /// x(beta) = a + b y, the eigenvalue of iota(beta) on the first column of M.
  i64 x_of(const OrderElement& beta) const {
    return mod(beta.a + static_cast<i128>(beta.b) * y, pp.modulus());
  }
};

inline SplitDiagonalizer make_split_diagonalizer(const TorusAutomorphism& a, const PrimePower& pp) {
  if (classify_prime(a, pp.p()) != PrimeKind::Split) fail(ErrorKind::NotSplit, "D is not a square mod p");
  const i64 N = pp.modulus();
  const Mat2 am = a.matrix().reduced(N);
  const i64 t = mod(a.trace(), N);
  const i64 root = sqrt_set_hensel(mod(a.discriminant(), N), pp.p(), pp.k()).front();
  const i64 half = inv_mod(2, N);
  const i64 lam = mul_mod(mod(t + root, N), half, N);
  const i64 mu = inv_mod(lam, N);

  // Column eigenvectors of A for eigenvalue e.
  auto candidates = [&](i64 e) {
    const std::array<i64, 2> u{am.b, mod(e - am.a, N)};
    const std::array<i64, 2> v{mod(e - am.d, N), am.c};
    return std::vector<std::array<i64, 2>>{u, v, {mod(u[0] + v[0], N), mod(u[1] + v[1], N)}};
  };
  for (const auto& c1 : candidates(lam)) {
    for (const auto& c2 : candidates(mu)) {
      const i64 det = mod(static_cast<i128>(c1[0]) * c2[1] - static_cast<i128>(c2[0]) * c1[1], N);
      if (!pp.is_unit(det)) continue;
      const i64 s = inv_mod(det, N);
      const Mat2 m{c1[0], mul_mod(c2[0], s, N), c1[1], mul_mod(c2[1], s, N)};
      const Mat2 diag = mul_mod(mul_mod(inverse_mod(m, N), am, N), m, N);
      if (diag != Mat2{lam, 0, 0, mu}) fail(ErrorKind::Internal, "diagonalizer check failed");
      return {m, lam, pp};
    }
  }
  fail(ErrorKind::Internal, "no unimodular eigenvector pair");
}

struct EigenCluster {
  i64 label = 0;
  int multiplicity = 0;
  std::vector<StateVector> basis;
};

/// Joint Hecke eigenspaces, labelled by exponent relative to a fitted global phase.
struct EigenDecomposition {
  PrimePower pp{3, 1};
  PrimeKind kind = PrimeKind::Inert;
  i64 order = 0;
  cplx phase{1.0, 0.0};
  std::vector<EigenCluster> clusters;
  double max_residual = 0.0;
  bool has_basis = true;

  i64 dimension() const {
    i64 s = 0;
    for (const auto& c : clusters) s += c.multiplicity;
    return s;
  }

  const EigenCluster* find(i64 label) const {
    auto it = std::lower_bound(clusters.begin(), clusters.end(), label,
                               [](const EigenCluster& c, i64 l) { return c.label < l; });
    return (it != clusters.end() && it->label == label) ? &*it : nullptr;
  }

  std::map<int, int> multiplicity_histogram() const {
    std::map<int, int> h;
    for (const auto& c : clusters) ++h[c.multiplicity];
    return h;
  }
};

inline constexpr double kClusterTolerance = 1e-6;

namespace detail {

/// Exponent j with mu / phase = e(j / order); throws when mu is off the lattice of roots.
inline i64 eigen_label(cplx mu, cplx phase, i64 order) {
  const cplx r = mu / phase;
  const double turns = std::arg(r) / (2.0 * std::numbers::pi) * static_cast<double>(order);
  const i64 j = mod(static_cast<i64>(std::llround(turns)), order);
  if (std::abs(r - unit_root(j, order)) > kClusterTolerance)
    fail(ErrorKind::ClusterMismatch, "eigenvalue is not a root of unity times the fitted phase");
  return j;
}

inline i64 expected_cluster_count(const PrimePower& pp, PrimeKind kind) {
  return kind == PrimeKind::Inert ? pp.modulus() : hecke_order(pp, kind);
}

inline void check_cluster_count(const EigenDecomposition& dec) {
  const i64 expected = expected_cluster_count(dec.pp, dec.kind);
  if (static_cast<i64>(dec.clusters.size()) != expected)
    fail(ErrorKind::ClusterMismatch, std::to_string(dec.clusters.size()) + " clusters, expected " + std::to_string(expected));
}

}  // namespace detail

/// Diagonalizes U~(iota(g)) for the generator g. Eigenvectors come from the Hermitian part of
/// e^{i phi} U~; groups of nearly equal Hermitian eigenvalues are re-diagonalized against U~ itself
/// (Rayleigh-Ritz with a Schur factorization). The global phase c is then fitted from mu^{|C|} = c^{|C|}.
inline EigenDecomposition eigendecompose(const HeckeGroup& group) {
  const PrimePower& pp = group.prime_power();
  const i64 N = pp.modulus();
  const i64 order = group.order();
  const DenseOperator u = propagator(iota(group.generator(), group.automorphism(), pp), pp);
  const Eigen::MatrixXcd& v = u.matrix();

  const cplx rot = std::polar(1.0, 0.7);
  Eigen::MatrixXcd z = (rot * v + std::conj(rot) * v.adjoint()) * 0.5;
  Eigen::VectorXd ev(N);
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(N), z.data(),
                                         static_cast<lapack_int>(N), ev.data());
  if (info != 0) fail(ErrorKind::Internal, "zheevd failed with info " + std::to_string(info));
  Eigen::MatrixXcd vz = v * z;
  std::vector<cplx> mus(static_cast<std::size_t>(N));

  constexpr double kRitzGap = 1e-4;
  for (i64 lo = 0; lo < N;) {
    i64 hi = lo + 1;
    while (hi < N && ev(hi) - ev(hi - 1) < kRitzGap) ++hi;
    const i64 width = hi - lo;
    if (width == 1) {
      mus[static_cast<std::size_t>(lo)] = z.col(lo).dot(vz.col(lo));
    } else {
      const Eigen::MatrixXcd small = z.middleCols(lo, width).adjoint() * vz.middleCols(lo, width);
      Eigen::ComplexSchur<Eigen::MatrixXcd> schur(small);
      z.middleCols(lo, width) = (z.middleCols(lo, width) * schur.matrixU()).eval();
      vz.middleCols(lo, width) = (vz.middleCols(lo, width) * schur.matrixU()).eval();
      for (i64 i = 0; i < width; ++i) mus[static_cast<std::size_t>(lo + i)] = schur.matrixT()(i, i);
    }
    lo = hi;
  }

  EigenDecomposition dec;
  dec.pp = pp;
  dec.kind = group.kind();
  dec.order = order;
  cplx power_sum{};
  for (const cplx& mu : mus) power_sum += std::pow(mu / std::abs(mu), static_cast<double>(order));
  dec.phase = std::polar(1.0, std::arg(power_sum) / static_cast<double>(order));

  std::map<i64, EigenCluster> by_label;
  const double scale = std::sqrt(static_cast<double>(N));
  for (i64 i = 0; i < N; ++i) {
    const cplx mu = mus[static_cast<std::size_t>(i)];
    dec.max_residual = std::max(dec.max_residual, (vz.col(i) - mu * z.col(i)).norm());
    const i64 j = detail::eigen_label(mu, dec.phase, order);
    auto& c = by_label[j];
    c.label = j;
    ++c.multiplicity;
    c.basis.emplace_back(pp, z.col(i) * scale);
  }
  for (auto& [j, c] : by_label) dec.clusters.push_back(std::move(c));
  detail::check_cluster_count(dec);
  return dec;
}

/// Discrete logarithm of every unit mod N to base x.
inline std::vector<i64> unit_dlog_table(i64 x, const PrimePower& pp) {
  const i64 N = pp.modulus();
  std::vector<i64> table(static_cast<std::size_t>(N), -1);
  i64 y = 1;
  const i64 units = N / pp.p() * (pp.p() - 1);
  for (i64 m = 0; m < units; ++m) {
    if (table[static_cast<std::size_t>(y)] >= 0) fail(ErrorKind::Internal, "base is not a primitive root");
    table[static_cast<std::size_t>(y)] = m;
    y = mul_mod(y, x, N);
  }
  return table;
}

/// chi~(y) = chi(beta) where x(beta) = y, zero on non-units.
inline StateVector split_character_vector(const HeckeCharacter& chi, const SplitDiagonalizer& m) {
  const HeckeGroup& group = chi.group();
  const PrimePower& pp = group.prime_power();
  const auto table = unit_dlog_table(m.x_of(group.generator()), pp);
  StateVector v = StateVector::zero(pp);
  for (i64 y = 0; y < pp.modulus(); ++y) {
    const i64 e = table[static_cast<std::size_t>(y)];
    if (e >= 0) v.amplitudes()(y) = unit_root(mul_mod(chi.index(), e, group.order()), group.order());
  }
  return v;
}

/// Normalized U~(M) chi~.
inline StateVector split_eigenfunction(const HeckeCharacter& chi, const SplitDiagonalizer& m) {
  if (chi.group().kind() != PrimeKind::Split) fail(ErrorKind::NotSplit, "split_eigenfunction needs a split prime");
  const PrimePower& pp = chi.group().prime_power();
  return propagator(m.m, pp).apply(split_character_vector(chi, m)).normalized();
}

/// Spectrum of a generalized permutation: on each cycle of length L the eigenvalues are the
/// L-th roots of the product of weights along the cycle.
struct MonomialCycle {
  std::vector<i64> points;
  cplx weight_product{1.0, 0.0};
};

inline std::vector<MonomialCycle> monomial_cycles(const MonomialOperator& op) {
  const std::size_t n = op.source.size();
  std::vector<char> seen(n, 0);
  std::vector<MonomialCycle> out;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    MonomialCycle c;
    std::size_t y = start;
    while (!seen[y]) {
      seen[y] = 1;
      c.points.push_back(static_cast<i64>(y));
      c.weight_product *= op.weight[y];
      y = static_cast<std::size_t>(op.source[y]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Eigenvector of op on one cycle for the eigenvalue lambda (lambda^L = weight product).
inline StateVector cycle_eigenvector(const MonomialOperator& op, const MonomialCycle& c, cplx lambda) {
  StateVector v = StateVector::zero(op.pp);
  cplx amp{1.0, 0.0};
  for (i64 y : c.points) {
    v.amplitudes()(y) = amp;
    // (op v)(y) = w[y] v(src[y]) = lambda v(y)
    amp = lambda * amp / op.weight[static_cast<std::size_t>(y)];
  }
  return v;
}

/// Split-case spectrum computed in the diagonal frame: U~(iota(g)) is conjugate (projectively) to
/// U~(diag(x_g, 1/x_g)), which is monomial. No basis vectors are stored.
inline EigenDecomposition eigendecompose_split_frame(const HeckeGroup& group, const SplitDiagonalizer& m) {
  if (group.kind() != PrimeKind::Split) fail(ErrorKind::NotSplit, "frame route needs a split prime");
  const PrimePower& pp = group.prime_power();
  const i64 order = group.order();
  const MonomialOperator op = diagonal_propagator(m.x_of(group.generator()), pp);
  EigenDecomposition dec;
  dec.pp = pp;
  dec.kind = group.kind();
  dec.order = order;
  dec.has_basis = false;
  std::map<i64, int> counts;
  for (const auto& c : monomial_cycles(op)) {
    const auto len = static_cast<double>(c.points.size());
    const double base = std::arg(c.weight_product) / len;
    for (std::size_t r = 0; r < c.points.size(); ++r) {
      const cplx lambda = std::polar(1.0, base + 2.0 * std::numbers::pi * static_cast<double>(r) / len);
      ++counts[detail::eigen_label(lambda, dec.phase, order)];
    }
  }
  for (const auto& [j, n] : counts) dec.clusters.push_back({j, n, {}});
  detail::check_cluster_count(dec);
  return dec;
}

/// Outcome of comparing |Tr U~(iota(beta))|^2 with the kernel count and p^{2l}.
struct TraceCheck {
  bool pass = false;
  double trace_sq = 0.0;
  i64 kernel = 0;
  int level = 0;
  i64 expected = 0;
};

inline TraceCheck trace_magnitude_check(const OrderElement& beta, const HeckeGroup& group) {
  const PrimePower& pp = group.prime_power();
  const Mat2 b = iota(beta, group.automorphism(), pp);
  TraceCheck r;
  r.trace_sq = std::norm(propagator_trace(b, pp));
  r.kernel = kernel_size(b, pp);
  r.level = congruence_level(beta, pp);
  r.expected = pp.power(r.level) * pp.power(r.level);
  const auto rel = [](double x, double y) { return std::abs(x - y) <= 1e-6 * std::max(1.0, std::abs(y)); };
  r.pass = rel(r.trace_sq, static_cast<double>(r.kernel)) && rel(r.trace_sq, static_cast<double>(r.expected));
  return r;
}

/// Twist tau with multiplicity(label) = k - level(label + tau) + 1 for every label, if one exists.
inline std::optional<i64> split_multiplicity_twist(const EigenDecomposition& dec) {
  const int k = dec.pp.k();
  if (static_cast<i64>(dec.clusters.size()) != dec.order) return std::nullopt;
  for (i64 tau = 0; tau < dec.order; ++tau) {
    bool ok = true;
    for (const auto& c : dec.clusters) {
      if (c.multiplicity != k - character_level(mod(c.label + tau, dec.order), dec.pp) + 1) {
        ok = false;
        break;
      }
    }
    if (ok) return tau;
  }
  return std::nullopt;
}

}  // namespace catmap
