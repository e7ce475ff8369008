#pragma once

// Matrix-element statistics: Q, twisted Fourier coefficients, normalized matrix elements,
// the limiting measure and its sampler, distribution comparison and the counting oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "catmap/error.hpp"
#include "catmap/expsum.hpp"
#include "catmap/hecke.hpp"
#include "catmap/modarith.hpp"
#include "catmap/quantization.hpp"

namespace catmap {

/// Q(n) = omega(nA, n), omega(n, m) = n1 m2 - n2 m1.
inline i64 quadratic_form_Q(const TorusAutomorphism& a, const Vec2& n) {
  const Vec2 na = row_times(n, a.matrix());
  return static_cast<i64>(static_cast<i128>(na.n1) * n.n2 - static_cast<i128>(na.n2) * n.n1);
}

/// nu -> f#(nu), nu != 0.
using TwistedSpectrum = std::map<i64, cplx>;

inline int parity_sign(const Vec2& n) { return mod(static_cast<i128>(n.n1) * n.n2, 2) == 0 ? 1 : -1; }

inline TwistedSpectrum twisted_coefficients(const FourierObservable& f, const TorusAutomorphism& a) {
  TwistedSpectrum out;
  for (const auto& [n, v] : f.coefficients()) {
    if (n == Vec2{0, 0}) continue;
    const i64 nu = quadratic_form_Q(a, n);
    if (nu == 0) continue;
    out[nu] += static_cast<double>(parity_sign(n)) * v;
  }
  return out;
}

/// Sorted sample.
struct EmpiricalSet {
  std::vector<double> values;
  std::string provenance;

  EmpiricalSet() = default;
  EmpiricalSet(std::vector<double> v, std::string tag) : values(std::move(v)), provenance(std::move(tag)) {
    std::sort(values.begin(), values.end());
  }
  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

inline void require_unit_spectrum(const TwistedSpectrum& s, const PrimePower& pp) {
  for (const auto& [nu, v] : s) {
    if (!pp.is_unit(nu)) fail(ErrorKind::BadNu, "Q(n) = " + std::to_string(nu) + " is divisible by p");
  }
}

struct NormalizedElements {
  EmpiricalSet set;
  std::vector<cplx> values;
  std::vector<i64> labels;
  i64 excluded_multiplicity = 0;
  double max_imag = 0.0;
};

/// sqrt(N) (<Op_N(f) psi, psi> - fhat(0)) for every multiplicity-one eigenfunction.
inline NormalizedElements normalized_elements(const FourierObservable& f, const TorusAutomorphism& a, const EigenDecomposition& dec) {
  const PrimePower& pp = dec.pp;
  if (!dec.has_basis) fail(ErrorKind::Internal, "decomposition carries no eigenvectors");
  // Op(fhat(0)) is fhat(0) I, so the mean is dropped before assembly instead of subtracted after
  FourierObservable oscillating;
  for (const auto& [n, v] : f.coefficients()) {
    if (n == Vec2{0, 0}) continue;
    if (!pp.is_unit(quadratic_form_Q(a, n))) fail(ErrorKind::BadNu, "Q(n) is divisible by p");
    oscillating.add(n, v);
  }
  const DenseOperator op = op_of_observable(oscillating, pp);
  const double root_n = std::sqrt(static_cast<double>(pp.modulus()));
  NormalizedElements out;
  std::vector<double> reals;
  for (const auto& c : dec.clusters) {
    if (c.multiplicity != 1) {
      out.excluded_multiplicity += c.multiplicity;
      continue;
    }
    const StateVector& psi = c.basis.front();
    const cplx v = root_n * inner_product(op.apply(psi), psi);
    out.values.push_back(v);
    out.labels.push_back(c.label);
    out.max_imag = std::max(out.max_imag, std::abs(v.imag()));
    reals.push_back(v.real());
  }
  out.set = EmpiricalSet(std::move(reals), "eigenfunctions");
  return out;
}

/// Split case without eigenvectors: F = sqrt(N) s / |C| sum_n fhat(n) (-1)^{n1 n2} E(Q(n)/2, chi)
/// over the characters of level k, which index the multiplicity-one eigenfunctions.
inline NormalizedElements normalized_elements_closed(const FourierObservable& f, const TorusAutomorphism& a,
                                                     const ExpSumContext& ctx, int sign) {
  const HeckeGroup& group = ctx.group();
  const PrimePower& pp = group.prime_power();
  if (group.kind() != PrimeKind::Split) fail(ErrorKind::NotSplit, "closed-form elements need a split prime");
  const i64 N = pp.modulus();
  const i64 half = inv_mod(2, N);
  std::vector<std::pair<i64, cplx>> terms;
  for (const auto& [n, v] : f.coefficients()) {
    if (n == Vec2{0, 0}) continue;
    const i64 q = quadratic_form_Q(a, n);
    if (!pp.is_unit(q)) fail(ErrorKind::BadNu, "Q(n) is divisible by p");
    terms.emplace_back(mul_mod(mod(q, N), half, N), static_cast<double>(parity_sign(n)) * v);
  }
  const double scale = std::sqrt(static_cast<double>(N)) * sign / static_cast<double>(group.order());
  NormalizedElements out;
  std::vector<double> reals;
  for (i64 j = 0; j < group.order(); ++j) {
    if (HeckeCharacter(group, j).level() != pp.k()) {
      ++out.excluded_multiplicity;
      continue;
    }
    cplx sum{};
    for (const auto& [nu, w] : terms) sum += w * (pp.k() >= 2 ? exp_sum_closed(ctx, nu, j) : exp_sum_bruteforce(ctx, nu, j));
    const cplx v = scale * sum;
    out.values.push_back(v);
    out.labels.push_back(j);
    out.max_imag = std::max(out.max_imag, std::abs(v.imag()));
    reals.push_back(v.real());
  }
  out.set = EmpiricalSet(std::move(reals), "closed-form");
  return out;
}

/// Up to `count` small n with p not dividing Q(n) and pairwise distinct Q(n).
inline std::vector<Vec2> choose_n_list(const TorusAutomorphism& a, i64 p, std::size_t count = 8) {
  std::vector<Vec2> out;
  std::vector<i64> seen;
  for (i64 r = 1; r <= 6 && out.size() < count; ++r) {
    for (i64 n1 = -r; n1 <= r && out.size() < count; ++n1) {
      for (i64 n2 = -r; n2 <= r && out.size() < count; ++n2) {
        if (std::max(std::llabs(n1), std::llabs(n2)) != r) continue;
        const i64 q = quadratic_form_Q(a, {n1, n2});
        if (mod(q, p) == 0 || std::find(seen.begin(), seen.end(), q) != seen.end()) continue;
        seen.push_back(q);
        out.push_back({n1, n2});
      }
    }
  }
  return out;
}

/// How the observed elements line up with sign * (-1)^{n1 n2} E(Q(n)/2, chi') / |C|.
struct Theorem1Report {
  i64 p = 0;
  int k = 0;
  PrimeKind kind = PrimeKind::Inert;
  std::vector<Vec2> n_list;
  i64 n_eigenfunctions = 0;
  i64 n_excluded = 0;
  int sign = 0;
  /// chi' index = offset + orientation * label.
  i64 offset = 0;
  int orientation = 0;
  bool matched_unique = false;
  /// eigenfunctions whose value vector is reproduced by more than one character
  i64 ambiguous = 0;
  double max_error = 0.0;
  std::vector<std::pair<i64, i64>> matches;  // (label, chi')
};

inline constexpr double kTheorem1Tolerance = 1e-7;

inline Theorem1Report theorem1_verify(const ExpSumContext& ctx, const EigenDecomposition& dec, const std::vector<Vec2>& n_list) {
  const HeckeGroup& group = ctx.group();
  const TorusAutomorphism& a = group.automorphism();
  const PrimePower& pp = group.prime_power();
  const i64 N = pp.modulus();
  const i64 order = group.order();
  if (!dec.has_basis) fail(ErrorKind::Internal, "decomposition carries no eigenvectors");
  const i64 half = inv_mod(2, N);
  for (const auto& n : n_list) {
    if (!pp.is_unit(quadratic_form_Q(a, n))) fail(ErrorKind::BadNu, "Q(n) is divisible by p");
  }

  // predicted[j][q] without the sign
  const std::size_t r = n_list.size();
  std::vector<cplx> predicted(static_cast<std::size_t>(order) * r);
  for (i64 j = 0; j < order; ++j) {
    for (std::size_t q = 0; q < r; ++q) {
      const i64 nu = mul_mod(mod(quadratic_form_Q(a, n_list[q]), N), half, N);
      const cplx e = pp.k() >= 2 ? exp_sum_closed(ctx, nu, j) : exp_sum_bruteforce(ctx, nu, j);
      predicted[static_cast<std::size_t>(j) * r + q] = static_cast<double>(parity_sign(n_list[q])) * e / static_cast<double>(order);
    }
  }

  Theorem1Report rep;
  rep.p = pp.p();
  rep.k = pp.k();
  rep.kind = group.kind();
  rep.n_list = n_list;

  struct Candidate {
    i64 label;
    std::vector<std::pair<int, i64>> hits;  // (sign, chi')
  };
  std::vector<Candidate> cands;
  for (const auto& c : dec.clusters) {
    if (c.multiplicity != 1) {
      rep.n_excluded += c.multiplicity;
      continue;
    }
    ++rep.n_eigenfunctions;
    std::vector<cplx> observed(r);
    for (std::size_t q = 0; q < r; ++q) observed[q] = matrix_element(n_list[q], c.basis.front());
    Candidate cand{c.label, {}};
    for (int s : {1, -1}) {
      for (i64 j = 0; j < order; ++j) {
        double err = 0.0;
        for (std::size_t q = 0; q < r && err < kTheorem1Tolerance; ++q)
          err = std::max(err, std::abs(observed[q] - static_cast<double>(s) * predicted[static_cast<std::size_t>(j) * r + q]));
        if (err < kTheorem1Tolerance) cand.hits.emplace_back(s, j);
      }
    }
    if (cand.hits.size() > 1) ++rep.ambiguous;
    cands.push_back(std::move(cand));
  }

  // (sign, orientation, offset) triples consistent with every eigenfunction
  std::map<std::tuple<int, int, i64>, i64> votes;
  for (const auto& c : cands) {
    std::vector<std::tuple<int, int, i64>> mine;
    for (const auto& [s, j] : c.hits) {
      mine.emplace_back(s, 1, mod(j - c.label, order));
      mine.emplace_back(s, -1, mod(j + c.label, order));
    }
    std::sort(mine.begin(), mine.end());
    mine.erase(std::unique(mine.begin(), mine.end()), mine.end());
    for (const auto& key : mine) ++votes[key];
  }
  std::vector<std::tuple<int, int, i64>> full;
  for (const auto& [key, n] : votes) {
    if (n == static_cast<i64>(cands.size())) full.push_back(key);
  }
  if (full.empty() || cands.empty()) fail(ErrorKind::NoMatch, "no character twist reproduces every eigenfunction");
  rep.matched_unique = full.size() == 1;
  std::tie(rep.sign, rep.orientation, rep.offset) = full.front();
  for (const auto& c : cands) {
    const i64 j = mod(rep.offset + rep.orientation * c.label, order);
    rep.matches.emplace_back(c.label, j);
  }
  for (const auto& cl : dec.clusters) {
    if (cl.multiplicity != 1) continue;
    const i64 j = mod(rep.offset + rep.orientation * cl.label, order);
    for (std::size_t q = 0; q < r; ++q) {
      const cplx obs = matrix_element(n_list[q], cl.basis.front());
      rep.max_error = std::max(rep.max_error, std::abs(obs - static_cast<double>(rep.sign) * predicted[static_cast<std::size_t>(j) * r + q]));
    }
  }
  return rep;
}

/// Exact rational number.
struct Rational {
  i64 num = 0;
  i64 den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline i64 binomial(int n, int r) {
  i64 c = 1;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

/// m-th moment of 2 cos(theta) under mu: binomial(m, m/2) / 2 for even m, else 0.
inline Rational mu_moment(int m) {
  if (m < 0) fail(ErrorKind::Internal, "negative moment");
  if (m == 0) return {1, 1};
  if (m % 2 != 0) return {0, 1};
  i64 num = binomial(m, m / 2);
  i64 den = 2;
  const i64 g = std::gcd(num, den);
  return {num / g, den / g};
}

/// P(2 cos(theta) <= v) for theta ~ mu.
inline double mu_cdf(double v) {
  const double c = std::clamp(v / 2.0, -1.0, 1.0);
  return 0.5 * (1.0 - std::acos(c) / std::numbers::pi) + (v >= 0.0 ? 0.5 : 0.0);
}

/// Y = 2 sum f#(nu) cos(theta_nu) with theta_nu iid mu.
inline EmpiricalSet sample_Yf(const TwistedSpectrum& spectrum, u64 seed, std::size_t count) {
  std::vector<double> weights;
  for (const auto& [nu, v] : spectrum) {
    if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v))) fail(ErrorKind::Schema, "twisted spectrum is not real");
    weights.push_back(v.real());
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<double> out(count);
  for (auto& y : out) {
    double s = 0.0;
    for (double w : weights) {
      const bool atom = (rng() >> 63) != 0;
      const double u = uniform();
      // cos(pi / 2) is not exactly zero in floating point; keep the atom exact
      if (!atom) s += 2.0 * w * std::cos(std::numbers::pi * u);
    }
    y = s;
  }
  return {std::move(out), "sampler"};
}

/// sup |F_left - F_right| over every sample point; ties are stepped together.
inline double ks_two_sample(const EmpiricalSet& left, const EmpiricalSet& right) {
  if (left.empty() || right.empty()) fail(ErrorKind::EmptySet, "KS needs nonempty samples");
  const auto& a = left.values;
  const auto& b = right.values;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) x = a[i];
    else x = b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// sup |F_left - cdf| checking both sides of every jump of the sample.
template <class Cdf>
double ks_against_cdf(const EmpiricalSet& left, Cdf&& cdf) {
  if (left.empty()) fail(ErrorKind::EmptySet, "KS needs a nonempty sample");
  const auto& a = left.values;
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < a.size()) {
    const double x = a[i];
    const double below = static_cast<double>(i) / n;
    while (i < a.size() && a[i] == x) ++i;
    const double above = static_cast<double>(i) / n;
    const double at = cdf(x);
    const double before = cdf(std::nextafter(x, -INFINITY));
    d = std::max({d, std::abs(above - at), std::abs(below - before)});
  }
  return d;
}

struct MomentTable {
  std::vector<double> moments;  // index m - 1 for m = 1..6
  i64 winsorized = 0;
};

inline MomentTable winsorized_moments(const EmpiricalSet& s, double clip, int max_order = 6) {
  MomentTable t;
  t.moments.assign(static_cast<std::size_t>(max_order), 0.0);
  for (double v : s.values) {
    if (std::abs(v) > clip) ++t.winsorized;
    const double c = std::clamp(v, -clip, clip);
    double pw = 1.0;
    for (int m = 1; m <= max_order; ++m) {
      pw *= c;
      t.moments[static_cast<std::size_t>(m - 1)] += pw;
    }
  }
  for (auto& m : t.moments) m /= static_cast<double>(std::max<std::size_t>(1, s.size()));
  return t;
}

inline double winsor_clip(i64 p) { return 10.0 * std::pow(static_cast<double>(p), 1.0 / 6.0); }

struct DistributionComparison {
  double ks = 0.0;
  MomentTable left;
  MomentTable right;
};

inline DistributionComparison compare_distribution(const EmpiricalSet& left, const EmpiricalSet& right, i64 p) {
  if (left.empty()) fail(ErrorKind::EmptySet, "left sample is empty");
  DistributionComparison c;
  c.ks = ks_two_sample(left, right);
  c.left = winsorized_moments(left, winsor_clip(p));
  c.right = winsorized_moments(right, winsor_clip(p));
  return c;
}

/// Single-nu model: V = 2 w cos(theta), compared through mu_cdf; model moments are exact.
inline DistributionComparison compare_distribution_mu(const EmpiricalSet& left, double w, i64 p) {
  if (left.empty()) fail(ErrorKind::EmptySet, "left sample is empty");
  DistributionComparison c;
  if (w == 0.0) {
    c.ks = ks_against_cdf(left, [](double v) { return v >= 0.0 ? 1.0 : 0.0; });
  } else if (w > 0.0) {
    c.ks = ks_against_cdf(left, [w](double v) { return mu_cdf(v / w); });
  } else {
    // V / w has the symmetric law mu, so the sign flip only moves the atom's side
    c.ks = ks_against_cdf(left, [w](double v) { return 1.0 - mu_cdf(std::nextafter(v / w, -INFINITY)); });
  }
  c.left = winsorized_moments(left, winsor_clip(p));
  c.right.moments.resize(6);
  for (int m = 1; m <= 6; ++m) c.right.moments[static_cast<std::size_t>(m - 1)] = std::pow(w, m) * mu_moment(m).value();
  return c;
}

namespace detail {

/// Unit x in [0, p^l) with x^2 = v, indexed by v.
inline std::vector<std::vector<i64>> unit_square_fibers(i64 p, i64 pl) {
  std::vector<std::vector<i64>> fibers(static_cast<std::size_t>(pl));
  for (i64 x = 0; x < pl; ++x) {
    if (x % p != 0) fibers[static_cast<std::size_t>(mul_mod(x, x, pl))].push_back(x);
  }
  return fibers;
}

inline i64 power_of(i64 p, int l) {
  i64 r = 1;
  for (int i = 0; i < l; ++i) r *= p;
  return r;
}

}  // namespace detail

/// #{x in X(p^l)^r, all units : nu_1 (D x_1^2 - 1) = nu_j (D x_j^2 - 1) for all j}, summed fiber by fiber.
inline i64 count_Y_prime(const TorusAutomorphism& a, i64 p, int l, const std::vector<i64>& nus) {
  if (nus.empty()) return 0;
  const i64 pl = detail::power_of(p, l);
  const i64 d = mod(a.discriminant(), pl);
  const i64 dinv = inv_mod(d, pl);
  const auto fibers = detail::unit_square_fibers(p, pl);
  i64 total = 0;
  for (i64 x1 = 0; x1 < pl; ++x1) {
    if (x1 % p == 0) continue;
    const i64 s = mod(static_cast<i128>(d) * mul_mod(x1, x1, pl) - 1, pl);
    if (s % p == 0) continue;
    const i64 t = mul_mod(mod(nus[0], pl), s, pl);
    i64 prod = 1;
    for (std::size_t j = 1; j < nus.size() && prod > 0; ++j) {
      // D x_j^2 - 1 = t / nu_j
      const i64 sq = mul_mod(mod(static_cast<i128>(mul_mod(t, inv_mod(mod(nus[j], pl), pl), pl)) + 1, pl), dinv, pl);
      prod *= static_cast<i64>(fibers[static_cast<std::size_t>(sq)].size());
    }
    total += prod;
  }
  return total;
}

/// Tuples counted by count_Y_prime that also satisfy prod beta(x_j)^{n_j} = 1 in the order mod p^l.
inline i64 count_Y0_prime(const TorusAutomorphism& a, i64 p, int l, const std::vector<i64>& nus, const std::vector<i64>& ns) {
  if (nus.empty()) return 0;
  if (ns.size() != nus.size()) fail(ErrorKind::DimensionMismatch, "need one exponent per nu");
  const PrimePower pp(p, l);
  const HeckeGroup group = build_group(a, pp);
  const i64 order = group.order();
  const i64 pl = pp.modulus();
  const i64 d = mod(a.discriminant(), pl);
  const i64 dinv = inv_mod(d, pl);
  const auto fibers = detail::unit_square_fibers(p, pl);
  auto dlog_beta = [&](i64 x) { return group.dlog(beta_of_x(x, group.ring(), pp)); };

  i64 total = 0;
  std::vector<std::vector<i64>> choices(nus.size());
  for (i64 x1 = 0; x1 < pl; ++x1) {
    if (x1 % p == 0) continue;
    const i64 s = mod(static_cast<i128>(d) * mul_mod(x1, x1, pl) - 1, pl);
    if (s % p == 0) continue;
    const i64 t = mul_mod(mod(nus[0], pl), s, pl);
    choices[0] = {mul_mod(mod(ns[0], order), dlog_beta(x1), order)};
    bool empty = false;
    for (std::size_t j = 1; j < nus.size(); ++j) {
      const i64 sq = mul_mod(mod(static_cast<i128>(mul_mod(t, inv_mod(mod(nus[j], pl), pl), pl)) + 1, pl), dinv, pl);
      choices[j].clear();
      for (i64 x : fibers[static_cast<std::size_t>(sq)]) choices[j].push_back(mul_mod(mod(ns[j], order), dlog_beta(x), order));
      empty = empty || choices[j].empty();
    }
    if (empty) continue;
    // walk the product of the per-coordinate choices
    std::vector<std::size_t> idx(nus.size(), 0);
    while (true) {
      i64 e = 0;
      for (std::size_t j = 0; j < nus.size(); ++j) e += choices[j][idx[j]];
      if (e % order == 0) ++total;
      std::size_t j = 0;
      while (j < nus.size() && ++idx[j] == choices[j].size()) idx[j++] = 0;
      if (j == nus.size()) break;
    }
  }
  return total;
}

/// (1/p) #{t mod p : (t - nu_j) / (D nu_j) is a nonzero square for every j}.
inline double square_density(const TorusAutomorphism& a, const std::vector<i64>& nus, i64 p) {
  const i64 d = mod(a.discriminant(), p);
  i64 hits = 0;
  for (i64 t = 0; t < p; ++t) {
    bool all = true;
    for (i64 nu : nus) {
      const i64 v = mul_mod(mod(t - nu, p), inv_mod(mul_mod(d, mod(nu, p), p), p), p);
      if (legendre(v, p) != 1) {
        all = false;
        break;
      }
    }
    if (all) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(p);
}

}  // namespace catmap
