#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "catmap/expsum.hpp"

using namespace catmap;

namespace {

const TorusAutomorphism kCat(2, 1, 1, 1);
const TorusAutomorphism kAlt(3, 2, 1, 1);

struct Case {
  TorusAutomorphism a;
  i64 p;
  int k;
};

// The oracle-equivalence grid; 5 is ramified for the cat map so 25 and 125 use kAlt.
const std::vector<Case> kGrid{{kCat, 3, 2}, {kCat, 3, 3}, {kCat, 3, 4}, {kCat, 3, 5}, {kAlt, 5, 2}, {kAlt, 5, 3}, {kCat, 11, 2}};

i64 first_non_residue(i64 p) {
  for (i64 r = 2;; ++r) {
    bool square = false;
    for (i64 x = 1; x < p; ++x) square = square || (x * x) % p == r % p;
    if (!square) return r;
  }
}

// Direct sum over X(p^k) written out independently of the library's tables.
cplx naive_sum(const HeckeGroup& g, i64 nu, i64 j) {
  const PrimePower& pp = g.prime_power();
  const i64 N = pp.modulus();
  const i64 d = mod(g.automorphism().discriminant(), N);
  cplx s{};
  for (i64 x = 0; x < N; ++x) {
    if ((d * (x * x % N) - 1) % pp.p() == 0) continue;
    const i64 e = g.dlog(beta_of_x(x, g.ring(), pp));
    const double ang = 2.0 * std::numbers::pi *
                       (static_cast<double>(mod(nu * x, N)) / static_cast<double>(N) +
                        static_cast<double>(mod(j * e, g.order())) / static_cast<double>(g.order()));
    s += cplx(std::cos(ang), std::sin(ang));
  }
  return s;
}

}  // namespace

TEST(BruteForce, MatchesNaiveSum) {
  for (const auto& c : {Case{kCat, 3, 3}, Case{kAlt, 5, 2}, Case{kCat, 11, 2}}) {
    const HeckeGroup g = build_group(c.a, PrimePower(c.p, c.k));
    const ExpSumContext ctx(g);
    for (i64 j = 0; j < g.order(); j += 3) ASSERT_NEAR(std::abs(exp_sum_bruteforce(ctx, 2, j) - naive_sum(g, 2, j)), 0.0, 1e-9);
  }
}

TEST(BruteForce, TrivialCharacterPrimeModulus) {
  for (i64 p : {3, 7, 13}) {  // inert: X is everything, the sum is complete
    const HeckeGroup g = build_group(kCat, PrimePower(p, 1));
    const ExpSumContext ctx(g);
    for (i64 nu = 1; nu < p; ++nu) EXPECT_NEAR(std::abs(exp_sum_bruteforce(ctx, nu, 0)), 0.0, 1e-10);
  }
  for (i64 p : {11, 19, 29}) {  // split: the two points +-1/d are missing
    const HeckeGroup g = build_group(kCat, PrimePower(p, 1));
    ASSERT_EQ(g.kind(), PrimeKind::Split);
    const ExpSumContext ctx(g);
    i64 d = 0;
    while ((d * d - 5) % p != 0) ++d;
    const i64 dinv = inv_mod(d, p);
    for (i64 nu = 1; nu < p; ++nu) {
      const double want = -2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(nu * dinv % p) / static_cast<double>(p));
      EXPECT_NEAR(std::abs(exp_sum_bruteforce(ctx, nu, 0) - want), 0.0, 1e-10);
    }
  }
}

TEST(BruteForce, RejectsNonUnitNu) {
  const HeckeGroup g = build_group(kCat, PrimePower(3, 2));
  const ExpSumContext ctx(g);
  for (i64 nu : {0, 3, 6, -9}) {
    try {
      exp_sum_bruteforce(ctx, nu, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NonUnitNu);
    }
  }
}

TEST(BruteForce, RealOnRandomPairs) {
  const HeckeGroup g = build_group(kAlt, PrimePower(5, 3));
  const ExpSumContext ctx(g);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<i64> nu_d(1, 124);
  std::uniform_int_distribution<i64> j_d(0, g.order() - 1);
  int done = 0;
  while (done < 50) {
    const i64 nu = nu_d(rng);
    if (nu % 5 == 0) continue;
    const cplx v = exp_sum_bruteforce(ctx, nu, j_d(rng));
    EXPECT_LT(std::abs(v.imag()), 1e-8);
    ++done;
  }
}

TEST(Closed, EquivalentToBruteForceOnGrid) {
  for (const auto& c : kGrid) {
    const HeckeGroup g = build_group(c.a, PrimePower(c.p, c.k));
    const ExpSumContext ctx(g);
    for (i64 nu : {i64{1}, i64{2}, first_non_residue(c.p)}) {
      for (i64 j = 0; j < g.order(); ++j) {
        const cplx brute = exp_sum_bruteforce(ctx, nu, j);
        const cplx closed = exp_sum_closed(ctx, nu, j);
        ASSERT_LT(std::abs(brute - closed), 1e-7) << c.p << '^' << c.k << " nu=" << nu << " j=" << j;
        ASSERT_LT(std::abs(brute.imag()), 1e-8 * (1.0 + std::abs(brute)));
      }
    }
  }
}

TEST(Closed, EquivalentForHigherPowersOfFive) {
  const HeckeGroup g = build_group(kAlt, PrimePower(5, 4));
  const ExpSumContext ctx(g);
  for (i64 nu : {1, 2, 3, 4, 7}) {
    for (i64 j = 0; j < g.order(); j += 7) ASSERT_LT(std::abs(exp_sum_bruteforce(ctx, nu, j) - exp_sum_closed(ctx, nu, j)), 1e-7);
  }
}

TEST(Closed, VanishesWhenTargetIsNonResidue) {
  for (const auto& c : {Case{kCat, 3, 2}, Case{kCat, 7, 2}, Case{kAlt, 5, 3}, Case{kCat, 11, 3}}) {
    const PrimePower pp(c.p, c.k);
    const HeckeGroup g = build_group(c.a, pp);
    const ExpSumContext ctx(g);
    const i64 d = mod(c.a.discriminant(), c.p);
    int seen = 0;
    for (i64 j = 0; j < g.order(); ++j) {
      const i64 tc = ctx.t_chi_of(j).value % c.p;
      const i64 target = mod((2 * tc + 1) * inv_mod(d, c.p), c.p);
      if (target == 0 || legendre(target, c.p) != -1) continue;
      EXPECT_NEAR(std::abs(exp_sum_closed(ctx, 1, j)), 0.0, 1e-9);
      ++seen;
    }
    EXPECT_GT(seen, 0);
  }
}

TEST(Closed, GoodBoundAndConjugatePairs) {
  for (const auto& c : {Case{kCat, 7, 2}, Case{kCat, 7, 3}, Case{kCat, 13, 2}, Case{kCat, 11, 3}}) {
    const PrimePower pp(c.p, c.k);
    const HeckeGroup g = build_group(c.a, pp);
    const ExpSumContext ctx(g);
    const double bound = 2.0 * std::pow(static_cast<double>(c.p), c.k / 2.0) * (1.0 + 1e-8);
    for (i64 j = 0; j < g.order(); ++j) {
      if (!is_good(ctx, 1, j)) continue;
      const auto terms = exp_sum_closed_terms(ctx, 1, j);
      cplx total{};
      for (const auto& t : terms) total += t.value;
      ASSERT_LE(std::abs(total) * static_cast<double>(ctx.low_modulus()), bound);
      if (std::abs(total) > 1e-9) {
        ASSERT_EQ(terms.size(), 2U);
        ASSERT_NEAR(std::abs(terms[0].value - std::conj(terms[1].value)), 0.0, 1e-9);
      }
    }
  }
}

TEST(Closed, RejectsPrimeModulus) {
  const HeckeGroup g = build_group(kCat, PrimePower(7, 1));
  const ExpSumContext ctx(g);
  try {
    exp_sum_closed(ctx, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::KTooSmall);
  }
}

TEST(Theta, Endpoints) {
  ExpSumRecord r;
  r.p = 7;
  r.k = 2;
  r.good = true;
  r.value = 0.0;
  EXPECT_NEAR(theta_angle(r), std::numbers::pi / 2, 1e-15);
  r.value = 14.0;
  EXPECT_NEAR(theta_angle(r), 0.0, 1e-15);
  r.value = -14.0;
  EXPECT_NEAR(theta_angle(r), std::numbers::pi, 1e-15);
  r.good = false;
  try {
    theta_angle(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadCharacter);
  }
}

TEST(Scan, RowCountOrderingAndBadCount) {
  for (const auto& c : {Case{kCat, 7, 2}, Case{kCat, 11, 2}, Case{kCat, 3, 4}, Case{kAlt, 5, 3}}) {
    const PrimePower pp(c.p, c.k);
    const HeckeGroup g = build_group(c.a, pp);
    const ExpSumContext ctx(g);
    const auto rows = scan_characters(ctx, {2, 1}, 3);
    ASSERT_EQ(static_cast<i64>(rows.size()), 2 * g.order());
    i64 bad = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ASSERT_EQ(rows[i].chi_index, static_cast<i64>(i / 2));
      ASSERT_EQ(rows[i].nu, static_cast<i64>(i % 2 + 1));
      ASSERT_EQ(rows[i].theta.has_value(), rows[i].good);
      if (rows[i].nu == 1 && !rows[i].good) ++bad;
    }
    const i64 pm = g.kind() == PrimeKind::Split ? c.p - 1 : c.p + 1;
    EXPECT_EQ(bad, pp.power(c.k - 2) * pm);
  }
}

TEST(Scan, IndependentOfWorkerCount) {
  const HeckeGroup g = build_group(kCat, PrimePower(13, 2));
  const ExpSumContext ctx(g);
  const auto one = scan_characters(ctx, {1, 3}, 1);
  const auto many = scan_characters(ctx, {3, 1}, 5);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    ASSERT_EQ(one[i].chi_index, many[i].chi_index);
    ASSERT_EQ(one[i].nu, many[i].nu);
    ASSERT_EQ(one[i].value, many[i].value);
  }
}

TEST(Scan, VanishingFractionNearOneHalf) {
  for (i64 p : {101, 211}) {
    const HeckeGroup g = build_group(kCat, PrimePower(p, 2));
    const ExpSumContext ctx(g);
    const auto rows = scan_characters(ctx, {1}, 2);
    double good = 0, vanished = 0;
    for (const auto& r : rows) {
      if (!r.good) continue;
      ++good;
      vanished += r.vanished;
    }
    EXPECT_LE(std::abs(vanished / good - 0.5), 3.0 / std::sqrt(static_cast<double>(p)));
  }
}

TEST(FindLarge, SumsHaveModulusPSquared) {
  for (const auto& c : {Case{kCat, 3, 3}, Case{kAlt, 5, 3}, Case{kCat, 7, 3}}) {
    const PrimePower pp(c.p, 3);
    const HeckeGroup g = build_group(c.a, pp);
    const ExpSumContext ctx(g);
    const auto large = find_large(ctx, 1);
    ASSERT_FALSE(large.empty()) << c.p;
    for (i64 j : large) {
      EXPECT_NEAR(std::abs(exp_sum_bruteforce(ctx, 1, j)), static_cast<double>(c.p * c.p), 1e-6 * c.p * c.p);
      EXPECT_FALSE(is_good(ctx, 1, j));
    }
  }
  const HeckeGroup g2 = build_group(kCat, PrimePower(3, 2));
  const ExpSumContext ctx2(g2);
  try {
    find_large(ctx2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WrongK);
  }
}
