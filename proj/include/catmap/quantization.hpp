#pragma once

// Hilbert space H_N = L^2(Z/NZ), elementary operators, observables and the
// propagator built from the sum over twisted elementary operators.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "catmap/error.hpp"
#include "catmap/modarith.hpp"

namespace catmap {

/// Largest N for which dense operators are assembled.
inline constexpr i64 kDenseLimit = 2400;

/// Lattice point n = (n1, n2), always used as a row vector.
struct Vec2 {
  i64 n1 = 0;
  i64 n2 = 0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
  friend auto operator<=>(const Vec2&, const Vec2&) = default;
  Vec2 operator-() const { return {-n1, -n2}; }
};

/// 2x2 integer (or residue) matrix [[a, b], [c, d]].
struct Mat2 {
  i64 a = 1, b = 0, c = 0, d = 1;

  static Mat2 identity() { return {}; }
  i128 det() const { return static_cast<i128>(a) * d - static_cast<i128>(b) * c; }
  i64 trace() const { return a + d; }

  Mat2 reduced(i64 n) const { return {mod(a, n), mod(b, n), mod(c, n), mod(d, n)}; }

  friend bool operator==(const Mat2&, const Mat2&) = default;
};

inline Mat2 mul_mod(const Mat2& x, const Mat2& y, i64 n) {
  return {mod(static_cast<i128>(x.a) * y.a + static_cast<i128>(x.b) * y.c, n),
          mod(static_cast<i128>(x.a) * y.b + static_cast<i128>(x.b) * y.d, n),
          mod(static_cast<i128>(x.c) * y.a + static_cast<i128>(x.d) * y.c, n),
          mod(static_cast<i128>(x.c) * y.b + static_cast<i128>(x.d) * y.d, n)};
}

/// Inverse of a matrix with unit determinant modulo n.
inline Mat2 inverse_mod(const Mat2& x, i64 n) {
  const i64 di = inv_mod(mod(x.det(), n), n);
  return {mul_mod(x.d, di, n), mul_mod(mod(-x.b, n), di, n), mul_mod(mod(-x.c, n), di, n), mul_mod(x.a, di, n)};
}

/// n -> nB over the integers.
inline Vec2 row_times(const Vec2& n, const Mat2& m) {
  return {static_cast<i64>(static_cast<i128>(n.n1) * m.a + static_cast<i128>(n.n2) * m.c),
          static_cast<i64>(static_cast<i128>(n.n1) * m.b + static_cast<i128>(n.n2) * m.d)};
}

inline Vec2 row_times_mod(const Vec2& n, const Mat2& m, i64 modulus) {
  return {mod(static_cast<i128>(n.n1) * m.a + static_cast<i128>(n.n2) * m.c, modulus),
          mod(static_cast<i128>(n.n1) * m.b + static_cast<i128>(n.n2) * m.d, modulus)};
}

/// Hyperbolic A in SL(2, Z).
class TorusAutomorphism {
 public:
  explicit TorusAutomorphism(const Mat2& m) : m_(m) {
    if (m.det() != 1) fail(ErrorKind::NotUnimodular, "det A must be 1");
    if (std::llabs(m.trace()) <= 2) fail(ErrorKind::NotHyperbolic, "|Tr A| must exceed 2");
  }
  TorusAutomorphism(i64 a, i64 b, i64 c, i64 d) : TorusAutomorphism(Mat2{a, b, c, d}) {}

  const Mat2& matrix() const { return m_; }
  i64 trace() const { return m_.trace(); }
  /// D = Tr(A)^2 - 4.
  i64 discriminant() const { return trace() * trace() - 4; }

  std::string str() const {
    return "[[" + std::to_string(m_.a) + "," + std::to_string(m_.b) + "],[" + std::to_string(m_.c) + "," +
           std::to_string(m_.d) + "]]";
  }

 private:
  Mat2 m_;
};

/// Element of H_N with the 1/N-weighted inner product.
class StateVector {
 public:
  StateVector(PrimePower pp, Eigen::VectorXcd amplitudes) : pp_(pp), amp_(std::move(amplitudes)) {
    if (amp_.size() != pp_.modulus()) fail(ErrorKind::DimensionMismatch, "amplitude count != N");
  }

  static StateVector zero(PrimePower pp) { return {pp, Eigen::VectorXcd::Zero(pp.modulus())}; }
  static StateVector ones(PrimePower pp) { return {pp, Eigen::VectorXcd::Ones(pp.modulus())}; }
  static StateVector delta(PrimePower pp, i64 y) {
    StateVector s = zero(pp);
    s.amp_(mod(y, pp.modulus())) = 1.0;
    return s;
  }

  const PrimePower& prime_power() const { return pp_; }
  i64 dimension() const { return pp_.modulus(); }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }
  Eigen::VectorXcd& amplitudes() { return amp_; }
  cplx operator()(i64 y) const { return amp_(y); }

  double norm() const { return std::sqrt(amp_.squaredNorm() / static_cast<double>(dimension())); }

  /// Rescaled to unit norm in the weighted inner product.
  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) fail(ErrorKind::NotNormalized, "cannot normalize the zero vector");
    return {pp_, amp_ / n};
  }

 private:
  PrimePower pp_;
  Eigen::VectorXcd amp_;
};

/// (1/N) sum_y phi(y) conj(psi(y)).
inline cplx inner_product(const StateVector& phi, const StateVector& psi) {
  if (phi.dimension() != psi.dimension()) fail(ErrorKind::DimensionMismatch, "inner product of different N");
  // Eigen's dot conjugates its left operand.
  return psi.amplitudes().dot(phi.amplitudes()) / static_cast<double>(phi.dimension());
}

/// Dense N x N operator on H_N.
class DenseOperator {
 public:
  DenseOperator(PrimePower pp, Eigen::MatrixXcd m) : pp_(pp), m_(std::move(m)) {
    if (m_.rows() != pp_.modulus() || m_.cols() != pp_.modulus())
      fail(ErrorKind::DimensionMismatch, "operator shape != N x N");
  }

  static DenseOperator identity(PrimePower pp) {
    return {pp, Eigen::MatrixXcd::Identity(pp.modulus(), pp.modulus())};
  }

  const PrimePower& prime_power() const { return pp_; }
  const Eigen::MatrixXcd& matrix() const { return m_; }

  StateVector apply(const StateVector& psi) const {
    if (psi.dimension() != pp_.modulus()) fail(ErrorKind::DimensionMismatch, "apply with different N");
    return {pp_, m_ * psi.amplitudes()};
  }
  DenseOperator adjoint() const { return {pp_, m_.adjoint()}; }
  cplx trace() const { return m_.trace(); }

  friend DenseOperator operator*(const DenseOperator& x, const DenseOperator& y) {
    if (x.pp_.modulus() != y.pp_.modulus()) fail(ErrorKind::DimensionMismatch, "product of different N");
    return {x.pp_, x.m_ * y.m_};
  }

  /// max |U U* - I| entrywise.
  double unitarity_defect() const {
    const auto n = m_.rows();
    return (m_ * m_.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  }

 private:
  PrimePower pp_;
  Eigen::MatrixXcd m_;
};

/// Finite Fourier expansion f(x) = sum_n fhat(n) e(n.x).
class FourierObservable {
 public:
  FourierObservable() = default;
  explicit FourierObservable(std::map<Vec2, cplx> coeffs) : coeffs_(std::move(coeffs)) {}

  void add(Vec2 n, cplx value) { coeffs_[n] += value; }
  const std::map<Vec2, cplx>& coefficients() const { return coeffs_; }

  /// fhat(0), the phase-space average.
  cplx mean() const {
    auto it = coeffs_.find(Vec2{0, 0});
    return it == coeffs_.end() ? cplx{} : it->second;
  }

  /// fhat(-n) == conj(fhat(n)) for every n.
  bool is_real(double tol = 1e-12) const {
    for (const auto& [n, v] : coeffs_) {
      auto it = coeffs_.find(-n);
      const cplx other = it == coeffs_.end() ? cplx{} : it->second;
      if (std::abs(other - std::conj(v)) > tol) return false;
    }
    return true;
  }

  /// cos(2 pi n.x) scaled by `amplitude`.
  static FourierObservable cosine(Vec2 n, double amplitude = 1.0) {
    FourierObservable f;
    f.add(n, amplitude / 2.0);
    f.add(-n, amplitude / 2.0);
    return f;
  }

 private:
  std::map<Vec2, cplx> coeffs_;
};

namespace detail {

/// e_{2N}(n1 n2) for the untwisted operator; depends on n1 n2 mod 2N.
inline cplx half_phase(const Vec2& n, i64 modulus) {
  const i64 two_n = 2 * modulus;
  return unit_root(mod(static_cast<i128>(n.n1) * n.n2, two_n), two_n);
}

}  // namespace detail

/// (T_N(n) psi)(y) = e_{2N}(n1 n2) e_N(n2 y) psi(y + n1).
inline StateVector apply_elementary(const Vec2& n, const StateVector& psi) {
  const i64 N = psi.dimension();
  const cplx phase = detail::half_phase(n, N);
  const i64 shift = mod(n.n1, N);
  const i64 freq = mod(n.n2, N);
  StateVector out = StateVector::zero(psi.prime_power());
  for (i64 y = 0; y < N; ++y) {
    out.amplitudes()(y) = phase * unit_root(mul_mod(freq, y, N), N) * psi((y + shift) % N);
  }
  return out;
}

/// Twisted operator (-1)^{n1 n2} T_N(n).
inline StateVector apply_twisted(const Vec2& n, const StateVector& psi) {
  StateVector out = apply_elementary(n, psi);
  if (mod(static_cast<i128>(n.n1) * n.n2, 2) != 0) out.amplitudes() *= -1.0;
  return out;
}

inline DenseOperator elementary_operator(const Vec2& n, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const cplx phase = detail::half_phase(n, N);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N, N);
  for (i64 y = 0; y < N; ++y) m(y, mod(y + n.n1, N)) = phase * unit_root(mul_mod(mod(n.n2, N), y, N), N);
  return {pp, std::move(m)};
}

/// Twisted operator; e_N(n1 n2 / 2) e_N(n2 y) on the shifted diagonal, so it depends only on n mod N.
inline DenseOperator twisted_operator(const Vec2& n, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const i64 half = inv_mod(2, N);
  const i64 c0 = mul_mod(half, mod(static_cast<i128>(n.n1) * n.n2, N), N);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N, N);
  for (i64 y = 0; y < N; ++y) m(y, mod(y + n.n1, N)) = unit_root(c0 + mul_mod(mod(n.n2, N), y, N), N);
  return {pp, std::move(m)};
}

/// Op_N(f) = sum_n fhat(n) T_N(n).
inline DenseOperator op_of_observable(const FourierObservable& f, const PrimePower& pp) {
  const i64 N = pp.modulus();
  if (N > kDenseLimit) fail(ErrorKind::TooLarge, "N above dense limit");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N, N);
  for (const auto& [n, v] : f.coefficients()) m += v * elementary_operator(n, pp).matrix();
  return {pp, std::move(m)};
}

/// <T_N(n) psi, psi> for a normalized psi.
inline cplx matrix_element(const Vec2& n, const StateVector& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-8) fail(ErrorKind::NotNormalized, "matrix_element needs a unit vector");
  return inner_product(apply_elementary(n, psi), psi);
}

/// #{n in (Z/NZ)^2 : n(B - I) == 0}, by enumeration.
inline i64 kernel_size_exhaustive(const Mat2& b, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const Mat2 m = Mat2{b.a - 1, b.b, b.c, b.d - 1}.reduced(N);
  i64 count = 0;
  for (i64 m1 = 0; m1 < N; ++m1) {
    for (i64 m2 = 0; m2 < N; ++m2) {
      if (mod(static_cast<i128>(m1) * m.a + static_cast<i128>(m2) * m.c, N) == 0 &&
          mod(static_cast<i128>(m1) * m.b + static_cast<i128>(m2) * m.d, N) == 0)
        ++count;
    }
  }
  return count;
}

/// Same count from the Smith normal form of B - I over Z_p.
inline i64 kernel_size_snf(const Mat2& b, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const int k = pp.k();
  const Mat2 m = Mat2{b.a - 1, b.b, b.c, b.d - 1}.reduced(N);
  int e1 = k;
  for (i64 entry : {m.a, m.b, m.c, m.d}) e1 = std::min(e1, valuation(entry, pp.p(), k));
  // Valuation of the determinant of the integer lift, capped at 2k.
  const i128 det = m.det();
  int vdet = 0;
  if (det == 0) {
    vdet = 2 * k;
  } else {
    i128 x = det < 0 ? -det : det;
    while (vdet < 2 * k && x % pp.p() == 0) {
      x /= pp.p();
      ++vdet;
    }
  }
  const int e2 = std::min(k, std::max(0, vdet - e1));
  return pp.power(e1) * pp.power(e2);
}

inline i64 kernel_size(const Mat2& b, const PrimePower& pp) {
  return pp.modulus() <= 1000 ? kernel_size_exhaustive(b, pp) : kernel_size_snf(b, pp);
}

/// Every m with m(B - I) == 0 mod N.
inline std::vector<Vec2> kernel_elements(const Mat2& b, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const Mat2 m = Mat2{b.a - 1, b.b, b.c, b.d - 1}.reduced(N);
  std::vector<Vec2> out;
  for (i64 m1 = 0; m1 < N; ++m1) {
    for (i64 m2 : solve_linear(m.c, mod(-static_cast<i128>(m1) * m.a, N), pp)) {
      if (mod(static_cast<i128>(m1) * m.b + static_cast<i128>(m2) * m.d, N) == 0) out.push_back({m1, m2});
    }
  }
  return out;
}

inline void require_unimodular(const Mat2& b, const PrimePower& pp) {
  if (mod(b.det(), pp.modulus()) != 1) fail(ErrorKind::NotUnimodular, "det B != 1 mod N");
}

namespace detail {

/// Data of T~(m) T~(-mB): shift s, linear frequency c and constant c0 (all mod N),
/// so that the product maps psi to y -> e_N(c0 + c y) psi(y + s).
struct PairTerm {
  i64 s, c, c0;
};

inline PairTerm pair_term(i64 m1, i64 m2, const Mat2& b, i64 N, i64 half) {
  const i64 v1 = mod(-(static_cast<i128>(m1) * b.a + static_cast<i128>(m2) * b.c), N);
  const i64 v2 = mod(-(static_cast<i128>(m1) * b.b + static_cast<i128>(m2) * b.d), N);
  const i64 s = mod(m1 + v1, N);
  const i64 c = mod(m2 + v2, N);
  const i64 c0 = mod(static_cast<i128>(half) * mod(static_cast<i128>(m1) * m2 + static_cast<i128>(v1) * v2, N) +
                         static_cast<i128>(v2) * m1,
                     N);
  return {s, c, c0};
}

}  // namespace detail

/// U~_N(B) = |ker_N(B - I)|^{-1/2} N^{-1} sum_m T~(m) T~(-mB); equals U_N(B) up to a global phase.
/// Row y, column y + s collects sum over m with shift s of e_N(c0(m) + c(m) y), so grouping m by
/// (s, c) turns the sum into a product with the DFT matrix.
inline DenseOperator propagator(const Mat2& b_in, const PrimePower& pp) {
  const i64 N = pp.modulus();
  if (N > kDenseLimit) fail(ErrorKind::TooLarge, "N above dense limit");
  const Mat2 b = b_in.reduced(N);
  require_unimodular(b, pp);
  const i64 half = inv_mod(2, N);
  const RootTable roots(N);
  Eigen::MatrixXcd weights = Eigen::MatrixXcd::Zero(N, N);
  for (i64 m1 = 0; m1 < N; ++m1) {
    for (i64 m2 = 0; m2 < N; ++m2) {
      const auto t = detail::pair_term(m1, m2, b, N, half);
      weights(t.s, t.c) += roots.at(t.c0);
    }
  }
  Eigen::MatrixXcd dft(N, N);
  for (i64 c = 0; c < N; ++c) {
    for (i64 y = 0; y < N; ++y) dft(c, y) = roots.at(mul_mod(c, y, N));
  }
  const Eigen::MatrixXcd acc = weights * dft;
  const double scale = 1.0 / (std::sqrt(static_cast<double>(kernel_size(b, pp))) * static_cast<double>(N));
  Eigen::MatrixXcd m(N, N);
  for (i64 s = 0; s < N; ++s) {
    for (i64 y = 0; y < N; ++y) m(y, (y + s) % N) = acc(s, y) * scale;
  }
  return {pp, std::move(m)};
}

/// Single entry <delta_y, U~(B) delta_z> of the propagator, summing only the m whose shift is z - y.
inline cplx propagator_entry(const Mat2& b_in, const PrimePower& pp, i64 y, i64 z, const RootTable& roots) {
  const i64 N = pp.modulus();
  const Mat2 b = b_in.reduced(N);
  const i64 half = inv_mod(2, N);
  // shift(m) = m1 (1 - b.a) - m2 b.c
  cplx sum{};
  for (i64 m2 = 0; m2 < N; ++m2) {
    const i64 rhs = mod(static_cast<i128>(z - y) + static_cast<i128>(m2) * b.c, N);
    for (i64 m1 : solve_linear(mod(1 - b.a, N), rhs, pp)) {
      const auto t = detail::pair_term(m1, m2, b, N, half);
      sum += roots(t.c0 + static_cast<i128>(t.c) * y % N);
    }
  }
  return sum / (std::sqrt(static_cast<double>(kernel_size_snf(b, pp))) * static_cast<double>(N));
}

/// Tr U~(B): only m in ker(B - I) contribute, each with weight N e_N(c0(m)).
inline cplx propagator_trace(const Mat2& b_in, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const Mat2 b = b_in.reduced(N);
  require_unimodular(b, pp);
  const i64 half = inv_mod(2, N);
  const auto kernel = kernel_elements(b, pp);
  cplx sum{};
  for (const auto& m : kernel) sum += unit_root(detail::pair_term(m.n1, m.n2, b, N, half).c0, N);
  return sum / std::sqrt(static_cast<double>(kernel.size()));
}

/// Generalized permutation operator (M psi)(y) = weight[y] psi(source[y]).
struct MonomialOperator {
  PrimePower pp;
  std::vector<i64> source;
  std::vector<cplx> weight;

  StateVector apply(const StateVector& psi) const {
    StateVector out = StateVector::zero(pp);
    for (std::size_t y = 0; y < source.size(); ++y)
      out.amplitudes()(static_cast<Eigen::Index>(y)) = weight[y] * psi(source[y]);
    return out;
  }
};

/// U~(diag(x, 1/x)) from individual propagator entries. The nonzero entry of row y sits in column x y;
/// its modulus must be 1, which (by unitarity) forces every other entry of the row to vanish.
inline MonomialOperator diagonal_propagator(i64 x, const PrimePower& pp) {
  const i64 N = pp.modulus();
  const Mat2 b{mod(x, N), 0, 0, inv_mod(x, N)};
  const RootTable roots(N);
  MonomialOperator out{pp, std::vector<i64>(static_cast<std::size_t>(N)), std::vector<cplx>(static_cast<std::size_t>(N))};
  for (i64 y = 0; y < N; ++y) {
    const i64 z = mul_mod(b.a, y, N);
    const cplx w = propagator_entry(b, pp, y, z, roots);
    if (std::abs(std::abs(w) - 1.0) > 1e-9) fail(ErrorKind::Internal, "diagonal propagator is not monomial");
    out.source[static_cast<std::size_t>(y)] = z;
    out.weight[static_cast<std::size_t>(y)] = w;
  }
  return out;
}

}  // namespace catmap
