#pragma once

// E_{p^k}(nu, chi) = sum over x in X(p^k) of e_{p^k}(nu x) chi(beta(x)), by direct summation and by
// the square-root closed forms.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "catmap/error.hpp"
#include "catmap/hecke.hpp"
#include "catmap/modarith.hpp"

namespace catmap {

/// Tables shared by every sum over one group.
class ExpSumContext {
 public:
  static constexpr i64 kFullTableLimit = 200000;

  explicit ExpSumContext(const HeckeGroup& group)
      : group_(&group), pp_(group.prime_power()), roots_(group.prime_power().modulus()), chi_roots_(group.order()) {
    const i64 N = pp_.modulus();
    const i64 t = group.ring().trace();
    d_ = mod(static_cast<i128>(t) * t - 4, N);
    if (pp_.k() >= 2) {
      const int l = pp_.k() / 2;
      low_ = pp_.power(l);
      tchi_unit_ = t_chi(HeckeCharacter(group, 1));
      // squares mod p^l, indexed by value
      square_roots_.assign(static_cast<std::size_t>(low_), {});
      for (i64 x = 0; x < low_; ++x) square_roots_[static_cast<std::size_t>(mul_mod(x, x, low_))].push_back(x);
      low_dlog_.assign(static_cast<std::size_t>(low_), -1);
      for (i64 x = 0; x < low_; ++x) low_dlog_[static_cast<std::size_t>(x)] = beta_dlog_direct(x);
    }
    if (N <= kFullTableLimit) {
      full_dlog_.assign(static_cast<std::size_t>(N), -1);
      for (i64 x = 0; x < N; ++x) full_dlog_[static_cast<std::size_t>(x)] = beta_dlog_direct(x);
    }
  }

  const HeckeGroup& group() const { return *group_; }
  const PrimePower& prime_power() const { return pp_; }
  i64 discriminant() const { return d_; }
  const RootTable& roots() const { return roots_; }
  const RootTable& chi_roots() const { return chi_roots_; }

  bool in_x(i64 x) const { return mod(static_cast<i128>(d_) * mul_mod(x, x, pp_.p()) - 1, pp_.p()) != 0; }

  /// dlog(beta(x)) for x in X(p^k), -1 outside.
  i64 beta_dlog(i64 x) const {
    x = mod(x, pp_.modulus());
    if (!full_dlog_.empty()) return full_dlog_[static_cast<std::size_t>(x)];
    if (x < low_) return low_dlog_[static_cast<std::size_t>(x)];
    return beta_dlog_direct(x);
  }

  TChi t_chi_of(i64 chi_index) const {
    return {mul_mod(mod(chi_index, group_->order()), tchi_unit_.value, tchi_unit_.modulus), tchi_unit_.modulus};
  }

  /// Sq(v, p^l) from the cached square table.
  const std::vector<i64>& low_square_roots(i64 v) const { return square_roots_[static_cast<std::size_t>(mod(v, low_))]; }
  i64 low_modulus() const { return low_; }

 private:
  i64 beta_dlog_direct(i64 x) const {
    if (!in_x(x)) return -1;
    return group_->dlog(beta_of_x(x, group_->ring(), pp_));
  }

  const HeckeGroup* group_;
  PrimePower pp_;
  RootTable roots_;
  RootTable chi_roots_;
  i64 d_ = 0;
  i64 low_ = 1;
  TChi tchi_unit_;
  std::vector<std::vector<i64>> square_roots_;
  std::vector<i64> low_dlog_;
  std::vector<i64> full_dlog_;
};

struct ExpSumRecord {
  i64 p = 0;
  int k = 0;
  i64 nu = 0;
  i64 chi_index = 0;
  cplx value{};
  std::optional<double> theta;
  bool good = false;
  bool vanished = false;
};

namespace detail {

inline void require_unit_nu(i64 nu, const PrimePower& pp) {
  if (!pp.is_unit(nu)) fail(ErrorKind::NonUnitNu, "nu = " + std::to_string(nu) + " is divisible by p");
}

inline cplx sum_term(const ExpSumContext& ctx, i64 nu, i64 chi_index, i64 x) {
  const i64 N = ctx.prime_power().modulus();
  const i64 order = ctx.group().order();
  const i64 e = ctx.beta_dlog(x);
  return ctx.roots().at(mul_mod(mod(nu, N), mod(x, N), N)) * ctx.chi_roots().at(mul_mod(mod(chi_index, order), e, order));
}

}  // namespace detail

inline cplx exp_sum_bruteforce(const ExpSumContext& ctx, i64 nu, i64 chi_index) {
  const PrimePower& pp = ctx.prime_power();
  detail::require_unit_nu(nu, pp);
  cplx sum{};
  for (i64 x = 0; x < pp.modulus(); ++x) {
    if (ctx.in_x(x)) sum += detail::sum_term(ctx, nu, chi_index, x);
  }
  return sum;
}

/// One surviving x of the closed form and its contribution (without the p^l prefactor).
struct ClosedTerm {
  i64 x = 0;
  cplx value{};
};

/// Surviving terms of the closed form. The Gauss factor is included for odd k.
inline std::vector<ClosedTerm> exp_sum_closed_terms(const ExpSumContext& ctx, i64 nu, i64 chi_index, bool check_lift = true) {
  const PrimePower& pp = ctx.prime_power();
  detail::require_unit_nu(nu, pp);
  if (pp.k() < 2) fail(ErrorKind::KTooSmall, "closed form needs k >= 2");
  const i64 p = pp.p();
  const i64 low = ctx.low_modulus();
  const i64 d = ctx.discriminant();
  const TChi tc = ctx.t_chi_of(chi_index);
  const bool odd = pp.k() % 2 == 1;
  const i64 high = odd ? low * p : low;

  auto term_at = [&](i64 x) {
    cplx v = detail::sum_term(ctx, nu, chi_index, x);
    if (odd) {
      // w = (D x^2 - 1)^{-1} mod p^{l+1}
      const i64 w = inv_mod(mod(static_cast<i128>(d) * mul_mod(x, x, high) - 1, high), high);
      const i64 f = mod(static_cast<i128>(mul_mod(mul_mod(2 * tc.value % p, d % p, p), x % p, p)) * mul_mod(w % p, w % p, p), p);
      const i64 shifted = mod(static_cast<i128>(nu) - static_cast<i128>(mul_mod(2 * tc.value % high, w, high)), high);
      if (shifted % low != 0) fail(ErrorKind::Internal, "linear Gauss coefficient is not divisible by p^l");
      v *= gauss_quadratic(f, shifted / low, p);
    }
    return v;
  };

  const i64 target = mul_mod(mod(2 * tc.value + nu, low), inv_mod(mod(static_cast<i128>(nu) * d, low), low), low);
  std::vector<ClosedTerm> out;
  for (i64 x : ctx.low_square_roots(target)) {
    if (!ctx.in_x(x)) continue;
    const cplx v = term_at(x);
    if (check_lift) {
      const cplx lifted = term_at(x + low);
      if (std::abs(lifted - v) > 1e-8 * (1.0 + std::abs(v))) fail(ErrorKind::Internal, "closed form depends on the lift");
    }
    out.push_back({x, v});
  }
  return out;
}

inline cplx exp_sum_closed(const ExpSumContext& ctx, i64 nu, i64 chi_index) {
  cplx sum{};
  for (const auto& t : exp_sum_closed_terms(ctx, nu, chi_index)) sum += t.value;
  return sum * static_cast<double>(ctx.low_modulus());
}

/// 2 t_chi != -nu mod p.
inline bool is_good(const ExpSumContext& ctx, i64 nu, i64 chi_index) {
  const TChi tc = ctx.t_chi_of(chi_index);
  return mod(2 * static_cast<i128>(tc.value) + nu, ctx.prime_power().p()) != 0;
}

/// theta in [0, pi] with E = 2 p^{k/2} cos(theta).
inline double theta_angle(const ExpSumRecord& r) {
  if (!r.good) fail(ErrorKind::BadCharacter, "theta is only defined for good characters");
  const double scale = 2.0 * std::pow(static_cast<double>(r.p), r.k / 2.0);
  return std::acos(std::clamp(r.value.real() / scale, -1.0, 1.0));
}

inline ExpSumRecord exp_sum_record(const ExpSumContext& ctx, i64 nu, i64 chi_index) {
  const PrimePower& pp = ctx.prime_power();
  ExpSumRecord r;
  r.p = pp.p();
  r.k = pp.k();
  r.nu = nu;
  r.chi_index = chi_index;
  const auto terms = exp_sum_closed_terms(ctx, nu, chi_index);
  cplx sum{};
  bool any = false;
  for (const auto& t : terms) {
    sum += t.value;
    any = any || std::abs(t.value) > 0.5;
  }
  r.value = sum * static_cast<double>(ctx.low_modulus());
  r.vanished = !any;
  r.good = is_good(ctx, nu, chi_index);
  if (r.good) r.theta = theta_angle(r);
  return r;
}

/// One record per (chi, nu), ordered by chi index then nu.
inline std::vector<ExpSumRecord> scan_characters(const ExpSumContext& ctx, std::vector<i64> nus, int jobs = 1) {
  if (ctx.prime_power().k() < 2) fail(ErrorKind::KTooSmall, "scan needs k >= 2");
  for (i64 nu : nus) detail::require_unit_nu(nu, ctx.prime_power());
  std::sort(nus.begin(), nus.end());
  nus.erase(std::unique(nus.begin(), nus.end()), nus.end());
  const i64 order = ctx.group().order();
  const auto width = static_cast<i64>(nus.size());
  std::vector<ExpSumRecord> out(static_cast<std::size_t>(order * width));
  auto work = [&](i64 lo, i64 hi) {
    for (i64 j = lo; j < hi; ++j) {
      for (i64 i = 0; i < width; ++i) out[static_cast<std::size_t>(j * width + i)] = exp_sum_record(ctx, nus[static_cast<std::size_t>(i)], j);
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    work(0, order);
  } else {
    std::vector<std::thread> pool;
    const i64 chunk = (order + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      const i64 lo = std::min(order, w * chunk);
      const i64 hi = std::min(order, lo + chunk);
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

/// Characters with 2 t_chi = -nu mod p^2 for k = 3; each must satisfy |E| = p^2.
inline std::vector<i64> find_large(const ExpSumContext& ctx, i64 nu) {
  const PrimePower& pp = ctx.prime_power();
  if (pp.k() != 3) fail(ErrorKind::WrongK, "find_large needs k = 3");
  detail::require_unit_nu(nu, pp);
  const i64 p2 = pp.p() * pp.p();
  const double target = static_cast<double>(p2);
  std::vector<i64> out;
  for (i64 j = 0; j < ctx.group().order(); ++j) {
    const TChi tc = ctx.t_chi_of(j);
    if (mod(2 * static_cast<i128>(tc.value) + nu, p2) != 0) continue;
    const double mag = std::abs(exp_sum_closed(ctx, nu, j));
    if (std::abs(mag - target) > 1e-6 * target) fail(ErrorKind::Internal, "|E| != p^2 for chi " + std::to_string(j));
    out.push_back(j);
  }
  return out;
}

}  // namespace catmap
