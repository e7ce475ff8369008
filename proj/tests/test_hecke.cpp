#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "catmap/hecke.hpp"

using namespace catmap;

namespace {

const TorusAutomorphism kCat(2, 1, 1, 1);
const TorusAutomorphism kAlt(3, 2, 1, 1);  // D = 12, so 5 is inert

i64 naive_norm(i64 a, i64 b, i64 t, i64 N) { return ((a * a + a * b * t + b * b) % N + N) % N; }

i64 naive_group_size(i64 t, i64 N) {
  i64 count = 0;
  for (i64 a = 0; a < N; ++a) {
    for (i64 b = 0; b < N; ++b) count += naive_norm(a, b, t, N) == 1;
  }
  return count;
}

ErrorKind kind_of(auto fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

// Number of characters j of an order-|C| cyclic group with v_p(j) = v (j != 0), by listing.
std::map<int, int> expected_split_histogram(const PrimePower& pp, i64 order) {
  std::map<int, int> h;
  for (i64 j = 0; j < order; ++j) {
    int level = 0;
    if (j != 0) {
      i64 x = j;
      int v = 0;
      while (x % pp.p() == 0 && v < pp.k() - 1) {
        x /= pp.p();
        ++v;
      }
      level = pp.k() - v;
    }
    ++h[pp.k() - level + 1];
  }
  return h;
}

}  // namespace

TEST(ClassifyPrime, Examples) {
  EXPECT_EQ(classify_prime(kCat, 11), PrimeKind::Split);
  EXPECT_EQ(16 % 11, 5);
  EXPECT_EQ(classify_prime(kCat, 3), PrimeKind::Inert);
  EXPECT_EQ(kind_of([] { classify_prime(kCat, 5); }), ErrorKind::Ramified);
  EXPECT_EQ(kind_of([] { classify_prime(kCat, 2); }), ErrorKind::EvenPrime);
  EXPECT_EQ(classify_prime(kAlt, 5), PrimeKind::Inert);
}

TEST(OrderRing, NormIsMultiplicative) {
  const OrderRing ring(3, 343);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<i64> d(0, 342);
  for (int i = 0; i < 500; ++i) {
    const auto x = ring.make(d(rng), d(rng));
    const auto y = ring.make(d(rng), d(rng));
    ASSERT_EQ(ring.norm(x), naive_norm(x.a, x.b, 3, 343));
    ASSERT_EQ(ring.norm(ring.mul(x, y)), ring.norm(x) * ring.norm(y) % 343);
    if (ring.norm(x) % 7 != 0) {
      ASSERT_EQ(ring.mul(x, ring.inverse(x)), ring.one());
    }
  }
  // sqrt(D)^2 = D
  const auto s = ring.sqrt_d();
  EXPECT_EQ(ring.mul(s, s), ring.make(5, 0));
}

TEST(HeckeGroup, OrderMatchesEnumeration) {
  for (auto [a, p, k] : {std::tuple{kCat, 3, 1}, {kCat, 3, 2}, {kCat, 3, 3}, {kCat, 7, 2}, {kCat, 11, 1}, {kCat, 11, 2}, {kAlt, 5, 2},
                         {kCat, 13, 2}, {kCat, 19, 2}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(a, pp);
    EXPECT_EQ(g.order(), naive_group_size(a.trace(), pp.modulus())) << p << '^' << k;
    EXPECT_EQ(g.order(), hecke_order(pp, g.kind()));
    EXPECT_TRUE(g.contains(g.ring().one()));
  }
  EXPECT_EQ(build_group(kCat, PrimePower(3, 1)).order(), 4);
  EXPECT_EQ(build_group(kCat, PrimePower(11, 1)).order(), 10);
  EXPECT_EQ(kind_of([] { build_group(kCat, PrimePower(5, 2)); }), ErrorKind::Ramified);
}

TEST(HeckeGroup, GeneratorHasFullOrder) {
  for (auto [p, k] : {std::pair<i64, int>{3, 3}, {7, 3}, {11, 3}, {13, 2}, {101, 2}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(kCat, pp);
    const OrderRing& ring = g.ring();
    ASSERT_EQ(ring.pow(g.generator(), static_cast<u64>(g.order())), ring.one());
    for (i64 q : prime_factors(g.order())) ASSERT_NE(ring.pow(g.generator(), static_cast<u64>(g.order() / q)), ring.one()) << q;
    for (i64 m = 0; m < g.order(); m += 7) ASSERT_EQ(g.dlog(g.element(m)), m);
  }
}

TEST(HeckeGroup, CongruenceSubgroupSizes) {
  for (auto [p, k] : {std::pair<i64, int>{3, 4}, {7, 3}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(kCat, pp);
    for (int l = 1; l <= k; ++l) {
      i64 count = 0;
      for (const auto& b : g.elements()) count += in_subgroup(b, pp, l);
      EXPECT_EQ(count, pp.power(k - l)) << p << '^' << k << " l=" << l;
    }
  }
}

TEST(Iota, Examples) {
  const PrimePower pp(7, 2);
  const OrderRing ring(3, pp.modulus());
  EXPECT_EQ(iota(ring.one(), kCat, pp), Mat2::identity());
  EXPECT_EQ(iota(ring.make(0, 1), kCat, pp), kCat.matrix());
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<i64> d(0, pp.modulus() - 1);
  for (int i = 0; i < 200; ++i) {
    const auto b = ring.make(d(rng), d(rng));
    const Mat2 m = iota(b, kCat, pp);
    ASSERT_EQ(mod(m.det(), pp.modulus()), ring.norm(b));
  }
}

TEST(Beta, ZeroMapsToMinusOne) {
  const PrimePower pp(3, 3);
  const OrderRing ring(3, pp.modulus());
  EXPECT_EQ(beta_of_x(0, ring, pp), ring.make(-1, 0));
}

TEST(Beta, BijectionOntoComplementOfFirstCongruenceSubgroup) {
  for (auto [a, p, k] : {std::tuple{kCat, 3, 3}, {kCat, 11, 2}, {kAlt, 5, 3}, {kCat, 3, 5}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(a, pp);
    const OrderRing& ring = g.ring();
    const i64 N = pp.modulus();
    const i64 d = mod(a.discriminant(), N);
    std::set<std::pair<i64, i64>> image;
    for (i64 x = 0; x < N; ++x) {
      if ((d * (x * x % N) - 1) % p == 0) {
        ASSERT_EQ(kind_of([&] { beta_of_x(x, ring, pp); }), ErrorKind::SingularPoint);
        continue;
      }
      const auto b = beta_of_x(x, ring, pp);
      ASSERT_EQ(ring.norm(b), 1);
      ASSERT_FALSE(in_subgroup(b, pp, 1));
      ASSERT_EQ(x_of_beta(b, ring, pp), x);
      // (1 + beta) / (sqrt(D) (1 - beta)) lands on -x instead
      const auto flipped = ring.mul(ring.add(ring.one(), b), ring.inverse(ring.mul(ring.sqrt_d(), ring.sub(ring.one(), b))));
      ASSERT_EQ(flipped, ring.make(-x, 0));
      image.insert({b.a, b.b});
    }
    i64 outside = 0;
    for (const auto& b : g.elements()) outside += !in_subgroup(b, pp, 1);
    EXPECT_EQ(static_cast<i64>(image.size()), outside) << p << '^' << k;
  }
}

TEST(Character, Multiplicative) {
  const HeckeGroup g = build_group(kCat, PrimePower(7, 2));
  const HeckeCharacter chi(g, 17);
  const HeckeCharacter psi(g, 40);
  for (i64 m = 0; m < g.order(); m += 5) {
    for (i64 n = 0; n < g.order(); n += 11) {
      const auto& x = g.element(m);
      const auto& y = g.element(n);
      ASSERT_EQ(chi.exponent(g.ring().mul(x, y)), (chi.exponent(x) + chi.exponent(y)) % g.order());
      ASSERT_EQ((chi * psi).exponent(x), (chi.exponent(x) + psi.exponent(x)) % g.order());
    }
  }
}

TEST(Character, LevelMatchesTrivialityOnSubgroups) {
  for (auto [p, k] : {std::pair<i64, int>{3, 3}, {11, 2}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(kCat, pp);
    for (i64 j = 0; j < g.order(); ++j) {
      const HeckeCharacter chi(g, j);
      int least = k;
      for (int l = k; l >= 0; --l) {
        bool trivial = true;
        for (const auto& b : g.elements()) trivial = trivial && (!in_subgroup(b, pp, l) || chi.exponent(b) == 0);
        if (!trivial) break;
        least = l;
      }
      ASSERT_EQ(chi.level(), least) << j;
    }
  }
}

TEST(TChi, DefiningRelationHoldsForAllX) {
  for (auto [a, p, k] : {std::tuple{kCat, 3, 2}, {kCat, 3, 3}, {kCat, 3, 4}, {kCat, 3, 5}, {kCat, 7, 3}, {kAlt, 5, 3}, {kCat, 11, 2}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(a, pp);
    const i64 order = g.order();
    for (i64 j = 0; j < order; ++j) {
      const HeckeCharacter chi(g, j);
      const TChi tc = t_chi(chi);
      if (j == 0) ASSERT_EQ(tc.value, 0);
      for (i64 x = 0; x < tc.modulus; ++x) {
        // chi(u(x)) = e_M(t x), compared as exponents over |C|
        const i64 lhs = chi.exponent(principal_unit(g, x));
        const i64 rhs = mul_mod(mul_mod(tc.value, x, tc.modulus), order / tc.modulus, order);
        ASSERT_EQ(lhs, rhs) << p << '^' << k << " j=" << j << " x=" << x;
      }
    }
    const TChi t1 = t_chi(HeckeCharacter(g, 5));
    const TChi t2 = t_chi(HeckeCharacter(g, 9));
    EXPECT_EQ(t_chi(HeckeCharacter(g, 14)).value, (t1.value + t2.value) % t1.modulus);
  }
  const HeckeGroup g1 = build_group(kCat, PrimePower(3, 1));
  EXPECT_EQ(kind_of([&] { t_chi(HeckeCharacter(g1, 1)); }), ErrorKind::KTooSmall);
}

TEST(HeckeOperators, Commute) {
  const PrimePower pp(3, 2);
  const HeckeGroup g = build_group(kCat, pp);
  std::vector<Eigen::MatrixXcd> ops;
  for (const auto& b : g.elements()) ops.push_back(propagator(iota(b, kCat, pp), pp).matrix());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) ASSERT_LT((ops[i] * ops[j] - ops[j] * ops[i]).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(TraceMagnitude, Examples) {
  const HeckeGroup g2 = build_group(kCat, PrimePower(3, 2));
  const auto id = trace_magnitude_check(g2.ring().one(), g2);
  EXPECT_TRUE(id.pass);
  EXPECT_NEAR(id.trace_sq, 81.0, 1e-8);
  for (const auto& b : g2.elements()) {
    const auto r = trace_magnitude_check(b, g2);
    EXPECT_TRUE(r.pass);
    if (!in_subgroup(b, g2.prime_power(), 1)) EXPECT_NEAR(r.trace_sq, 1.0, 1e-8);
  }
  const HeckeGroup g3 = build_group(kCat, PrimePower(3, 3));
  int seen = 0;
  for (const auto& b : g3.elements()) {
    if (congruence_level(b, g3.prime_power()) != 1) continue;
    EXPECT_NEAR(trace_magnitude_check(b, g3).trace_sq, 9.0, 1e-7);
    ++seen;
  }
  EXPECT_EQ(seen, 9 - 3);
}

TEST(Eigendecompose, InertNineDimensional) {
  const HeckeGroup g = build_group(kCat, PrimePower(3, 2));
  const auto dec = eigendecompose(g);
  EXPECT_EQ(dec.order, 12);
  EXPECT_EQ(dec.dimension(), 9);
  i64 squares = 0;
  for (const auto& c : dec.clusters) {
    EXPECT_LE(c.multiplicity, 1);
    squares += static_cast<i64>(c.multiplicity) * c.multiplicity;
  }
  EXPECT_EQ(squares, 9);
  EXPECT_LT(dec.max_residual, 1e-8);
}

TEST(Eigendecompose, BasisIsOrthonormalEigenbasis) {
  for (auto [a, p, k] : {std::tuple{kCat, 7, 2}, {kAlt, 5, 2}, {kCat, 11, 2}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(a, pp);
    const auto dec = eigendecompose(g);
    std::vector<const StateVector*> all;
    for (const auto& c : dec.clusters) {
      ASSERT_EQ(static_cast<int>(c.basis.size()), c.multiplicity);
      for (const auto& v : c.basis) all.push_back(&v);
    }
    ASSERT_EQ(static_cast<i64>(all.size()), pp.modulus());
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double want = i == j ? 1.0 : 0.0;
        ASSERT_NEAR(std::abs(inner_product(*all[i], *all[j])), want, 1e-7);
      }
    }
    // every Hecke operator acts on each cluster by the scalar chi_label(beta) times a common phase
    for (i64 m : {i64{1}, i64{2}, g.order() / 2 + 1}) {
      const auto u = propagator(iota(g.element(m), a, pp), pp);
      for (const auto& c : dec.clusters) {
        const StateVector& v = c.basis.front();
        const cplx mu = inner_product(u.apply(v), v);
        ASSERT_NEAR(std::abs(mu), 1.0, 1e-7);
        ASSERT_LT((u.apply(v).amplitudes() - mu * v.amplitudes()).norm() / std::sqrt(static_cast<double>(pp.modulus())), 1e-7);
      }
    }
  }
}

TEST(Eigendecompose, SplitMultiplicitiesFollowCharacterLevel) {
  for (auto [p, k] : {std::pair<i64, int>{11, 1}, {11, 2}, {19, 2}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(kCat, pp);
    const auto dec = eigendecompose(g);
    EXPECT_EQ(dec.dimension(), pp.modulus());
    EXPECT_EQ(dec.multiplicity_histogram(), expected_split_histogram(pp, g.order())) << p << '^' << k;
    EXPECT_TRUE(split_multiplicity_twist(dec).has_value());
  }
}

TEST(Eigendecompose, FrameRouteAgreesWithDense) {
  const PrimePower pp(11, 2);
  const HeckeGroup g = build_group(kCat, pp);
  const auto dense = eigendecompose(g);
  const auto frame = eigendecompose_split_frame(g, make_split_diagonalizer(kCat, pp));
  EXPECT_FALSE(frame.has_basis);
  EXPECT_EQ(frame.dimension(), pp.modulus());
  EXPECT_EQ(frame.multiplicity_histogram(), dense.multiplicity_histogram());
  EXPECT_TRUE(split_multiplicity_twist(frame).has_value());
}

TEST(SplitDiagonalizer, Invariants) {
  for (auto [p, k] : {std::pair<i64, int>{11, 1}, {11, 3}, {19, 2}, {101, 2}}) {
    const PrimePower pp(p, k);
    const i64 N = pp.modulus();
    const auto m = make_split_diagonalizer(kCat, pp);
    EXPECT_EQ(mod(m.m.det(), N), 1);
    const Mat2 diag = mul_mod(mul_mod(inverse_mod(m.m, N), kCat.matrix(), N), m.m, N);
    EXPECT_EQ(diag, (Mat2{m.y, 0, 0, inv_mod(m.y, N)}));
    EXPECT_EQ(mod(m.y + inv_mod(m.y, N), N), 3);
  }
  EXPECT_EQ(kind_of([] { make_split_diagonalizer(kCat, PrimePower(3, 2)); }), ErrorKind::NotSplit);
}

TEST(SplitEigenfunction, IsJointEigenvector) {
  for (auto [p, k] : {std::pair<i64, int>{11, 1}, {11, 2}}) {
    const PrimePower pp(p, k);
    const HeckeGroup g = build_group(kCat, pp);
    const auto m = make_split_diagonalizer(kCat, pp);
    const auto u = propagator(iota(g.generator(), kCat, pp), pp);
    for (i64 j = 0; j < g.order(); ++j) {
      const auto v = split_eigenfunction(HeckeCharacter(g, j), m);
      ASSERT_NEAR(v.norm(), 1.0, 1e-12);
      const auto w = u.apply(v);
      const cplx mu = inner_product(w, v);
      ASSERT_LT((w.amplitudes() - mu * v.amplitudes()).norm() / std::sqrt(static_cast<double>(pp.modulus())), 1e-7);
    }
  }
  const HeckeGroup inert = build_group(kCat, PrimePower(3, 2));
  EXPECT_EQ(kind_of([&] { split_eigenfunction(HeckeCharacter(inert, 1), make_split_diagonalizer(kCat, PrimePower(11, 1))); }), ErrorKind::NotSplit);
}

TEST(SplitEigenfunction, MatchesUniqueDenseEigenvector) {
  const PrimePower pp(11, 2);
  const HeckeGroup g = build_group(kCat, pp);
  const auto dec = eigendecompose(g);
  const auto m = make_split_diagonalizer(kCat, pp);
  int matched = 0;
  for (i64 j = 0; j < g.order(); ++j) {
    const HeckeCharacter chi(g, j);
    if (chi.level() != pp.k()) continue;
    const auto v = split_eigenfunction(chi, m);
    double best = 0.0;
    int best_mult = 0;
    for (const auto& c : dec.clusters) {
      double overlap = 0.0;
      for (const auto& b : c.basis) overlap += std::norm(inner_product(v, b));
      if (overlap > best) {
        best = overlap;
        best_mult = c.multiplicity;
      }
    }
    EXPECT_NEAR(best, 1.0, 1e-7) << j;
    EXPECT_EQ(best_mult, 1);
    ++matched;
  }
  EXPECT_EQ(matched, 100);
}
