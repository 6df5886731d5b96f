#pragma once

#include <cstdint>
#include <vector>

#include "fractal_evt/scaled_real.hpp"

namespace fractal_evt {

using uint128 = unsigned __int128;

/// Nonnegative rational num/den with den > 0. Denominators stay below 2^126
/// so that 2*num never overflows during descent.
struct Rational {
  uint128 num = 0;
  uint128 den = 1;
};

/// Exact dyadic value of a double in [0,1]. Doubles below 2^-72 carry more
/// than 125 binary places and are rounded to den = 2^125.
Rational exact_rational(double x);

/// Three-way comparison of rationals without overflowing products.
int compare(const Rational& a, const Rational& b) noexcept;

/// Finite continued fraction [0; a1, a2, ..., ar].
class ContinuedFraction {
 public:
  ContinuedFraction() = default;
  /// Throws kInvalidArgument unless every quotient is >= 1 and, for r >= 2,
  /// the last one is >= 2.
  explicit ContinuedFraction(std::vector<std::uint64_t> partial_quotients);

  /// Expansion of p/q with 0 <= p <= q, q > 0.
  static ContinuedFraction from_rational(std::uint64_t p, std::uint64_t q);

  const std::vector<std::uint64_t>& partial_quotients() const noexcept {
    return quotients_;
  }

 private:
  std::vector<std::uint64_t> quotients_;
};

/// Q(x) by run-compressed descent through the Farey map. Rational inputs
/// (every double) terminate with the exact dyadic value; a positive tol
/// stops the descent once the remaining enclosure is narrower than tol.
double qmark_eval(double x, double tol = 0.0);
double qmark_eval(const Rational& x, double tol = 0.0);

/// Q(x) with a 64-bit binary exponent, for values below the double range.
ScaledReal qmark_scaled(const Rational& x);

/// Alternating-sum form sum_i (-1)^(i+1) 2^(1-(a1+...+ai)).
double qmark_eval_cf(const ContinuedFraction& cf);

/// x with |Q(x) - y| < tol, built from the binary digits of y.
double qmark_inverse(double y, double tol = 1e-12);

/// Q(b) - Q(a) for a <= b, evaluated by descending both endpoints together
/// so no difference of nearby values is ever formed.
ScaledReal interval_measure_scaled(const Rational& a, const Rational& b);
double interval_measure(double a, double b, double tol = 0.0);

/// Exact Q-measure of [1/k - eps, 1/k + eps] intersected with [0,1].
ScaledReal ball_measure(std::uint64_t k, double eps);

/// Leading behaviour of the Q-measure of a ball of radius eps about 1/k:
/// prefactor * exp(-rate / eps) with rate = log(2)/k^2.
struct BallAsymptotic {
  std::uint64_t k = 2;
  double prefactor = 0.0;
  double rate = 0.0;

  static BallAsymptotic for_center(std::uint64_t k);
  double log_value(double eps) const noexcept;
  double value(double eps) const noexcept;
};

double ball_measure_asymptotic(std::uint64_t k, double eps);

/// 2 exp(-log 2 / eps), the small-argument behaviour of Q.
double small_x_asymptotic(double eps);

}  // namespace fractal_evt
