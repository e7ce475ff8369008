#pragma once

// Self-checks run by `catmap verify`, one function per module, each returning pass/fail lines.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "catmap/distribution.hpp"
#include "catmap/expsum.hpp"
#include "catmap/hecke.hpp"
#include "catmap/modarith.hpp"
#include "catmap/quantization.hpp"

namespace catmap::suites {

struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

class Recorder {
 public:
  explicit Recorder(std::string prefix) : prefix_(std::move(prefix)) {}

  void add(const std::string& suite, const std::string& name, bool pass, const std::string& detail = {}) {
    checks_.push_back({suite, prefix_ + " " + name, pass, detail});
  }
  const std::vector<Check>& checks() const { return checks_; }
  bool all_pass() const {
    for (const auto& c : checks_) {
      if (!c.pass) return false;
    }
    return true;
  }

 private:
  std::string prefix_;
  std::vector<Check> checks_;
};

inline std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

inline void modarith_suite(const PrimePower& pp, Recorder& rec) {
  const i64 p = pp.p();
  const i64 N = pp.modulus();
  bool inv_ok = true;
  for (i64 a = 1; a < std::min<i64>(N, 5000); ++a) {
    if (!pp.is_unit(a)) continue;
    inv_ok = inv_ok && mul_mod(a, inv_mod(a, pp), N) == 1 && inv_mod(inv_mod(a, pp), pp) == a;
  }
  rec.add("modarith", "inverse roundtrip", inv_ok);

  bool sq_ok = true;
  for (int l = 1; l <= pp.k(); ++l) {
    const i64 m = pp.power(l);
    if (m > 2000) break;
    for (i64 nu = 0; nu < m; ++nu) sq_ok = sq_ok && sqrt_set_exhaustive(nu, p, l) == sqrt_set_hensel(nu, p, l);
  }
  rec.add("modarith", "square roots: exhaustive == Hensel", sq_ok);

  bool leg_ok = true;
  for (i64 a = 0; a < p && p < 100; ++a) leg_ok = leg_ok && legendre(a, p) == legendre_exhaustive(a, p);
  rec.add("modarith", "Legendre: Euler == exhaustive", leg_ok);

  bool gauss_ok = true;
  const double root_p = std::sqrt(static_cast<double>(p));
  for (i64 f = 0; f < p; ++f) {
    for (i64 g = 0; g < p; ++g) {
      const double mag = std::abs(gauss_quadratic(f, g, p));
      const double want = f != 0 ? root_p : (g == 0 ? static_cast<double>(p) : 0.0);
      gauss_ok = gauss_ok && std::abs(mag - want) <= 1e-9 * std::max(1.0, want);
    }
  }
  rec.add("modarith", "quadratic Gauss sum magnitudes", gauss_ok);
}

inline const std::vector<Vec2>& egorov_vectors() {
  static const std::vector<Vec2> ns{{1, 0}, {0, 1}, {1, 1}, {2, -1}, {-3, 2}, {5, 7}, {4, 0}, {-2, -5}};
  return ns;
}

inline void quantization_suite(const TorusAutomorphism& a, const PrimePower& pp, Recorder& rec) {
  const DenseOperator u = propagator(a.matrix(), pp);
  const DenseOperator ua = u.adjoint();
  std::mt19937_64 rng(static_cast<u64>(pp.modulus()));
  std::normal_distribution<double> gauss;
  double unit = 0.0;
  double egorov = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXcd v(pp.modulus());
    for (auto& x : v) x = cplx(gauss(rng), gauss(rng));
    const StateVector psi(pp, v);
    unit = std::max(unit, std::abs(u.apply(psi).norm() - psi.norm()));
    for (const auto& n : egorov_vectors()) {
      const StateVector lhs = ua.apply(apply_twisted(n, u.apply(psi)));
      const StateVector rhs = apply_twisted(row_times(n, a.matrix()), psi);
      egorov = std::max(egorov, (lhs.amplitudes() - rhs.amplitudes()).cwiseAbs().maxCoeff());
    }
  }
  rec.add("quantization", "propagator is unitary", unit < 1e-8, "defect " + fmt(unit));
  rec.add("quantization", "twisted Egorov identity", egorov < 1e-8, "max error " + fmt(egorov));
}

inline void hecke_suite(const HeckeGroup& group, const EigenDecomposition& dec, Recorder& rec) {
  const PrimePower& pp = group.prime_power();
  rec.add("hecke", "group order", group.order() == hecke_order(pp, group.kind()), std::to_string(group.order()));
  bool traces = true;
  for (const auto& b : group.elements()) traces = traces && trace_magnitude_check(b, group).pass;
  rec.add("hecke", "|Tr|^2 == kernel size == p^{2l}", traces);
  rec.add("hecke", "dimensions sum to N", dec.dimension() == pp.modulus());
  if (group.kind() == PrimeKind::Inert) {
    bool simple = true;
    for (const auto& c : dec.clusters) simple = simple && c.multiplicity <= 1;
    rec.add("hecke", "inert eigenspaces are at most one-dimensional", simple);
  } else {
    const auto tau = split_multiplicity_twist(dec);
    rec.add("hecke", "split multiplicities are k - l + 1", tau.has_value());
  }
  rec.add("hecke", "eigenvector residual", dec.max_residual < 1e-7, fmt(dec.max_residual));
}

inline i64 non_residue(i64 p) {
  i64 r = 2;
  while (legendre(r, p) != -1) ++r;
  return r;
}

inline void expsum_suite(const ExpSumContext& ctx, Recorder& rec) {
  const PrimePower& pp = ctx.prime_power();
  if (pp.k() < 2) return;
  double err = 0.0;
  double imag = 0.0;
  bool bound = true;
  const double limit = 2.0 * std::pow(static_cast<double>(pp.p()), pp.k() / 2.0) * (1.0 + 1e-8);
  for (i64 nu : {i64{1}, i64{2}, non_residue(pp.p())}) {
    for (i64 j = 0; j < ctx.group().order(); ++j) {
      const cplx brute = exp_sum_bruteforce(ctx, nu, j);
      const cplx closed = exp_sum_closed(ctx, nu, j);
      err = std::max(err, std::abs(brute - closed));
      imag = std::max(imag, std::abs(brute.imag()) / (1.0 + std::abs(brute)));
      if (is_good(ctx, nu, j)) bound = bound && std::abs(brute) <= limit;
    }
  }
  rec.add("expsum", "closed form == brute force", err < 1e-7, "max error " + fmt(err));
  rec.add("expsum", "sums are real", imag < 1e-8);
  rec.add("expsum", "good characters obey |E| <= 2 p^{k/2}", bound);
}

inline Theorem1Report theorem1_suite(const ExpSumContext& ctx, const EigenDecomposition& dec, Recorder& rec) {
  const auto ns = choose_n_list(ctx.group().automorphism(), ctx.prime_power().p());
  Theorem1Report r;
  try {
    r = theorem1_verify(ctx, dec, ns);
  } catch (const Error& e) {
    rec.add("theorem1", "matrix elements match E/|C|", false, e.what());
    return r;
  }
  rec.add("theorem1", "matrix elements match E/|C|", r.max_error < kTheorem1Tolerance && r.matched_unique,
          "sign " + std::to_string(r.sign) + ", " + std::to_string(r.n_eigenfunctions) + " eigenfunctions, error " + fmt(r.max_error));
  return r;
}

/// For k = 3 the characters with 2 t_chi = -nu mod p^2 give eigenfunctions whose matrix element has
/// modulus exactly 1/(p +- 1).
inline void slow_decay_suite(const ExpSumContext& ctx, const EigenDecomposition& dec, const Theorem1Report& t1, Recorder& rec) {
  const PrimePower& pp = ctx.prime_power();
  if (pp.k() != 3 || t1.sign == 0) return;
  const HeckeGroup& group = ctx.group();
  const Vec2 n = t1.n_list.front();
  const i64 N = pp.modulus();
  const i64 nu = mul_mod(mod(quadratic_form_Q(group.automorphism(), n), N), inv_mod(2, N), N);
  const auto large = find_large(ctx, nu);
  double best = 0.0;
  for (const auto& [label, chi] : t1.matches) {
    if (std::find(large.begin(), large.end(), chi) == large.end()) continue;
    best = std::max(best, std::abs(matrix_element(n, dec.find(label)->basis.front())));
  }
  const double want = 1.0 / static_cast<double>(group.order() / pp.power(2));
  rec.add("slow-decay", "large sums exist", !large.empty(), std::to_string(large.size()) + " characters");
  rec.add("slow-decay", "|<T(n) psi, psi>| = 1/(p +- 1)", std::abs(best - want) < 1e-8,
          fmt(best) + " vs N^(-1/3) = " + fmt(std::pow(static_cast<double>(N), -1.0 / 3.0)));
}

inline void distribution_suite(const ExpSumContext& ctx, const EigenDecomposition& dec, int sign, Recorder& rec) {
  const HeckeGroup& group = ctx.group();
  const TorusAutomorphism& a = group.automorphism();
  const PrimePower& pp = group.prime_power();
  const Vec2 n = choose_n_list(a, pp.p(), 1).front();
  const FourierObservable f = FourierObservable::cosine(n);
  const auto dense = normalized_elements(f, a, dec);
  rec.add("distribution", "normalized elements are real", dense.max_imag < 1e-7, fmt(dense.max_imag));
  if (group.kind() == PrimeKind::Split && pp.k() >= 2) {
    const auto closed = normalized_elements_closed(f, a, ctx, sign);
    bool same = closed.set.size() == dense.set.size();
    for (std::size_t i = 0; same && i < closed.set.size(); ++i)
      same = std::abs(closed.set.values[i] - dense.set.values[i]) < 1e-6;
    rec.add("distribution", "closed-form and eigenvector routes agree", same);
  }
  const auto model = sample_Yf(twisted_coefficients(f, a), 12345, 20000);
  const auto cmp = compare_distribution(dense.set, model, pp.p());
  rec.add("distribution", "KS distance to the limiting model (informational)", std::isfinite(cmp.ks), fmt(cmp.ks));
}

}  // namespace catmap::suites
