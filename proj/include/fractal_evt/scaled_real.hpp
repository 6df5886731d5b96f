#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace fractal_evt {

/// Nonnegative real stored as mantissa * 2^exponent with a 64-bit exponent.
///
/// Question-mark measures of small balls go far below the double range
/// (the ball of radius 1e-5 around 1/4 has measure near 2^-6250), while
/// every quantity the fits consume is a logarithm. Only the operations
/// needed for sums of positive dyadic terms are provided.
class ScaledReal {
 public:
  constexpr ScaledReal() noexcept = default;

  static ScaledReal from_double(double value) noexcept {
    ScaledReal r;
    if (value > 0.0) {
      int e = 0;
      r.mantissa_ = std::frexp(value, &e);
      r.exponent_ = e;
    }
    return r;
  }

  static ScaledReal pow2(std::int64_t exponent) noexcept {
    ScaledReal r;
    r.mantissa_ = 0.5;
    r.exponent_ = exponent + 1;
    return r;
  }

  /// Value exp(log_value); useful for reference curves.
  static ScaledReal from_log(double log_value) noexcept {
    if (log_value == -std::numeric_limits<double>::infinity()) return {};
    double log2v = log_value / std::log(2.0);
    double whole = std::floor(log2v);
    ScaledReal r = from_double(std::exp2(log2v - whole));
    r.exponent_ += static_cast<std::int64_t>(whole);
    return r;
  }

  bool is_zero() const noexcept { return mantissa_ == 0.0; }
  double mantissa() const noexcept { return mantissa_; }
  std::int64_t exponent() const noexcept { return exponent_; }

  /// Natural logarithm; -inf for zero.
  double log() const noexcept {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    return std::log(mantissa_) + static_cast<double>(exponent_) * std::log(2.0);
  }

  /// Conversion to double, underflowing to zero.
  double to_double() const noexcept {
    if (is_zero()) return 0.0;
    if (exponent_ < -1100) return 0.0;
    if (exponent_ > 1100) return std::numeric_limits<double>::infinity();
    return std::ldexp(mantissa_, static_cast<int>(exponent_));
  }

  ScaledReal& operator+=(const ScaledReal& other) noexcept {
    if (other.is_zero()) return *this;
    if (is_zero()) {
      *this = other;
      return *this;
    }
    const ScaledReal& big = exponent_ >= other.exponent_ ? *this : other;
    const ScaledReal& small = exponent_ >= other.exponent_ ? other : *this;
    std::int64_t shift = big.exponent_ - small.exponent_;
    double m = big.mantissa_;
    std::int64_t e = big.exponent_;
    if (shift < 1100) m += std::ldexp(small.mantissa_, -static_cast<int>(shift));
    normalize(m, e);
    return *this;
  }

  ScaledReal& scale_pow2(std::int64_t k) noexcept {
    if (!is_zero()) exponent_ += k;
    return *this;
  }

  ScaledReal& operator*=(double factor) noexcept {
    if (is_zero() || factor <= 0.0) {
      *this = ScaledReal{};
      return *this;
    }
    double m = mantissa_ * factor;
    std::int64_t e = exponent_;
    normalize(m, e);
    return *this;
  }

  friend ScaledReal operator+(ScaledReal a, const ScaledReal& b) noexcept {
    a += b;
    return a;
  }
  friend ScaledReal operator*(ScaledReal a, double f) noexcept {
    a *= f;
    return a;
  }

  friend std::partial_ordering operator<=>(const ScaledReal& a,
                                           const ScaledReal& b) noexcept {
    if (a.is_zero() || b.is_zero()) return a.mantissa_ <=> b.mantissa_;
    if (a.exponent_ != b.exponent_) return a.exponent_ <=> b.exponent_;
    return a.mantissa_ <=> b.mantissa_;
  }
  friend bool operator==(const ScaledReal& a, const ScaledReal& b) noexcept {
    return a.mantissa_ == b.mantissa_ && a.exponent_ == b.exponent_;
  }

 private:
  void normalize(double m, std::int64_t e) noexcept {
    int k = 0;
    mantissa_ = std::frexp(m, &k);
    exponent_ = e + k;
  }

  double mantissa_ = 0.0;  // in [0.5, 1) or exactly 0
  std::int64_t exponent_ = 0;
};

}  // namespace fractal_evt
