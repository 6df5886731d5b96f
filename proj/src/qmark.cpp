#include "fractal_evt/qmark.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <utility>

#include "fractal_evt/error.hpp"
#include "fractal_evt/mobius.hpp"

namespace fractal_evt {

namespace {

constexpr double kLog2 = 0.69314718055994530942;

// Contributions below 2^-kDepthCap are dropped; ScaledReal holds them but
// nothing downstream can tell them from zero.
constexpr std::uint64_t kDepthCap = std::uint64_t{1} << 62;

std::uint64_t saturating_add(std::uint64_t depth, uint128 run) noexcept {
  if (run >= kDepthCap || depth + static_cast<std::uint64_t>(run) >= kDepthCap)
    return kDepthCap;
  return depth + static_cast<std::uint64_t>(run);
}

enum class Descent { kExact, kTruncated };

// Farey-map descent of p/q. A left step x -> x/(1-x) halves Q; a right step
// x -> 2 - 1/x maps Q to 2Q - 1. Whole runs are taken at once: r left steps
// send p/q to p/(q - r p), and r right steps act the same way on 1 - x.
// `right(d, r)` receives each right run starting at depth d and
// `terminal(d)` the final landing on 1.
template <class Right, class Terminal>
Descent descend(uint128 p, uint128 q, std::uint64_t max_depth, std::uint64_t& depth,
                Right&& right, Terminal&& terminal) {
  depth = 0;
  for (;;) {
    if (p == 0) return Descent::kExact;
    if (p == q) {
      terminal(depth);
      return Descent::kExact;
    }
    if (depth >= max_depth) return Descent::kTruncated;
    if (2 * p <= q) {
      const uint128 r = (q - p) / p;
      q -= r * p;
      depth = saturating_add(depth, r);
    } else {
      const uint128 py = q - p;
      const uint128 r = (q - py - 1) / py;
      right(depth, r);
      q -= r * py;
      p = q - py;
      depth = saturating_add(depth, r);
    }
    if (depth >= kDepthCap) return Descent::kTruncated;
  }
}

int clamp_exponent(std::uint64_t d) noexcept {
  return static_cast<int>(std::min<std::uint64_t>(d, 2000));
}

int clamp_exponent(uint128 d) noexcept {
  return static_cast<int>(std::min<uint128>(d, 2000));
}

ScaledReal scaled_right_run(std::uint64_t depth, uint128 run) {
  ScaledReal term = ScaledReal::pow2(-static_cast<std::int64_t>(depth));
  if (run < 64) term *= 1.0 - std::ldexp(1.0, -clamp_exponent(run));
  return term;
}

int bit_width(uint128 v) noexcept {
  const auto high = static_cast<std::uint64_t>(v >> 64);
  if (high != 0) return 64 + std::bit_width(high);
  return std::bit_width(static_cast<std::uint64_t>(v));
}

Rational complement(const Rational& x) noexcept { return {x.den - x.num, x.den}; }

}  // namespace

Rational exact_rational(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "rational conversion needs x in [0,1]");
  if (x == 0.0) return {0, 1};
  int e = 0;
  const double m = std::frexp(x, &e);
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
  int shift = 53 - e;
  if (shift > 125) {
    const int drop = shift - 125;
    if (drop >= 64) return {0, 1};
    const std::uint64_t half = std::uint64_t{1} << (drop - 1);
    mantissa = (mantissa + half) >> drop;
    shift = 125;
  }
  const int trailing = std::min(std::countr_zero(mantissa), shift);
  mantissa >>= trailing;
  shift -= trailing;
  return {mantissa, uint128{1} << shift};
}

int compare(const Rational& a, const Rational& b) noexcept {
  uint128 pa = a.num, qa = a.den, pb = b.num, qb = b.den;
  int sign = 1;
  for (;;) {
    const uint128 ia = pa / qa, ib = pb / qb;
    if (ia != ib) return ia < ib ? -sign : sign;
    const uint128 ra = pa % qa, rb = pb % qb;
    if (ra == 0 || rb == 0) {
      if (ra == rb) return 0;
      return ra == 0 ? -sign : sign;
    }
    // ra/qa < rb/qb exactly when qa/ra > qb/rb.
    pa = qa;
    qa = ra;
    pb = qb;
    qb = rb;
    sign = -sign;
  }
}

ContinuedFraction::ContinuedFraction(std::vector<std::uint64_t> partial_quotients)
    : quotients_(std::move(partial_quotients)) {
  for (auto a : quotients_)
    if (a == 0)
      throw Error(ErrorCode::kInvalidArgument, "partial quotients must be positive");
  if (quotients_.size() >= 2 && quotients_.back() < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "continued fraction is not canonical (last quotient 1)");
}

ContinuedFraction ContinuedFraction::from_rational(std::uint64_t p, std::uint64_t q) {
  if (q == 0 || p > q)
    throw Error(ErrorCode::kInvalidArgument, "continued fraction needs 0 <= p <= q");
  std::vector<std::uint64_t> out;
  while (p != 0) {
    out.push_back(q / p);
    const std::uint64_t r = q % p;
    q = p;
    p = r;
  }
  return ContinuedFraction(std::move(out));
}

double qmark_eval(const Rational& x, double tol) {
  std::uint64_t max_depth = kDepthCap;
  if (tol > 0.0) max_depth = static_cast<std::uint64_t>(std::ceil(-std::log2(tol))) + 1;
  double value = 0.0;
  std::uint64_t depth = 0;
  const Descent status = descend(
      x.num, x.den, max_depth, depth,
      [&](std::uint64_t d, uint128 r) {
        value += std::ldexp(1.0, -clamp_exponent(d)) -
                 std::ldexp(1.0, -clamp_exponent(uint128{d} + r));
      },
      [&](std::uint64_t d) { value += std::ldexp(1.0, -clamp_exponent(d)); });
  if (status == Descent::kTruncated) value += std::ldexp(1.0, -clamp_exponent(depth) - 1);
  return value;
}

double qmark_eval(double x, double tol) { return qmark_eval(exact_rational(x), tol); }

ScaledReal qmark_scaled(const Rational& x) {
  ScaledReal value;
  std::uint64_t depth = 0;
  descend(
      x.num, x.den, kDepthCap, depth,
      [&](std::uint64_t d, uint128 r) { value += scaled_right_run(d, r); },
      [&](std::uint64_t d) {
        value += ScaledReal::pow2(-static_cast<std::int64_t>(d));
      });
  return value;
}

double qmark_eval_cf(const ContinuedFraction& cf) {
  double value = 0.0;
  std::uint64_t partial = 0;
  double sign = 1.0;
  for (auto a : cf.partial_quotients()) {
    partial = std::min<std::uint64_t>(partial + std::min<std::uint64_t>(a, 4000), 4000);
    value += sign * std::ldexp(1.0, 1 - static_cast<int>(partial));
    sign = -sign;
  }
  return value;
}

double qmark_inverse(double y, double tol) {
  if (!(y >= 0.0 && y <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "qmark_inverse needs y in [0,1]");
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be positive");
  if (y == 1.0) return 1.0;
  if (y == 0.0) return 0.0;
  // y = mantissa * 2^-shift with a 53-bit mantissa: shift-53 leading zeros,
  // then the mantissa bits, then zeros forever.
  int e = 0;
  const double m = std::frexp(y, &e);
  const auto mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
  MobiusInterval word;
  const auto done = [&] {
    return word.width() < tol && std::ldexp(1.0, -clamp_exponent(word.depth())) < tol;
  };
  if (e < 0) word.append_run(0, static_cast<std::uint64_t>(-e));
  int bit = 52;
  while (bit >= 0 && !done()) {
    const int symbol = static_cast<int>((mantissa >> bit) & 1u);
    std::uint64_t length = 0;
    while (bit >= 0 && static_cast<int>((mantissa >> bit) & 1u) == symbol) {
      ++length;
      --bit;
    }
    if (bit < 0 && symbol == 0) break;
    word.append_run(symbol, length);
  }
  if (!done()) word.append_infinite_run(0);
  return word.image().midpoint();
}

ScaledReal interval_measure_scaled(const Rational& a_in, const Rational& b_in) {
  const int order = compare(a_in, b_in);
  if (order > 0) throw Error(ErrorCode::kInvalidArgument, "interval_measure needs a <= b");
  if (order == 0) return {};
  uint128 pa = a_in.num, qa = a_in.den, pb = b_in.num, qb = b_in.den;
  std::uint64_t depth = 0;
  const auto at_depth = [&](ScaledReal v, std::uint64_t extra) {
    return v.scale_pow2(-static_cast<std::int64_t>(depth + extra));
  };
  for (;;) {
    if (depth >= kDepthCap) return {};
    if (pa == 0) return at_depth(qmark_scaled({pb, qb}), 0);
    if (pb == qb) return at_depth(qmark_scaled(complement({pa, qa})), 0);
    const bool left_a = 2 * pa <= qa;
    const bool left_b = 2 * pb <= qb;
    if (left_a && left_b) {
      const uint128 r = std::min((qa - pa) / pa, (qb - pb) / pb);
      qa -= r * pa;
      qb -= r * pb;
      depth = saturating_add(depth, r);
    } else if (!left_a && !left_b) {
      const uint128 ya = qa - pa, yb = qb - pb;
      const uint128 r = std::min((qa - ya - 1) / ya, (qb - yb - 1) / yb);
      qa -= r * ya;
      pa = qa - ya;
      qb -= r * yb;
      pb = qb - yb;
      depth = saturating_add(depth, r);
    } else {
      // a in the left branch, b in the right: Q(b) - Q(a) splits into
      // 1 - Q(a') and Q(b'), both computed directly.
      ScaledReal sum = qmark_scaled({qa - 2 * pa, qa - pa});
      sum += qmark_scaled({2 * pb - qb, pb});
      return at_depth(sum, 1);
    }
  }
}

double interval_measure(double a, double b, double /*tol*/) {
  return interval_measure_scaled(exact_rational(a), exact_rational(b)).to_double();
}

ScaledReal ball_measure(std::uint64_t k, double eps) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "ball center 1/k needs k >= 1");
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ball radius must be positive");
  if (eps >= 1.0) return ScaledReal::from_double(1.0);
  const Rational r = exact_rational(eps);
  if (std::bit_width(k) + bit_width(r.den) > 125) {
    const double lo = std::max(0.0, 1.0 / static_cast<double>(k) - eps);
    const double hi = std::min(1.0, 1.0 / static_cast<double>(k) + eps);
    return interval_measure_scaled(exact_rational(lo), exact_rational(hi));
  }
  // 1/k -+ num/den = (den -+ k num) / (k den)
  const uint128 den = r.den * k;
  const uint128 offset = r.num * k;
  Rational lo{0, 1}, hi{1, 1};
  if (r.den > offset) lo = {r.den - offset, den};
  if (r.den + offset < den) hi = {r.den + offset, den};
  return interval_measure_scaled(lo, hi);
}

BallAsymptotic BallAsymptotic::for_center(std::uint64_t k) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "ball asymptotic needs k >= 2");
  const double kd = static_cast<double>(k);
  return {k, std::exp2(3.0 - kd - 1.0 / kd), kLog2 / (kd * kd)};
}

double BallAsymptotic::log_value(double eps) const noexcept {
  const double kd = static_cast<double>(k);
  return (3.0 - kd - 1.0 / kd) * kLog2 - rate / eps;
}

double BallAsymptotic::value(double eps) const noexcept { return std::exp(log_value(eps)); }

double ball_measure_asymptotic(std::uint64_t k, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  return BallAsymptotic::for_center(k).value(eps);
}

double small_x_asymptotic(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  return 2.0 * std::exp(-kLog2 / eps);
}

}  // namespace fractal_evt
