#include "fractal_evt/mobius.hpp"

#include <algorithm>

namespace fractal_evt {

namespace {

constexpr double kExactLimit = 9007199254740992.0;  // 2^53

}  // namespace

void MobiusInterval::append_infinite_run(int symbol) noexcept {
  if (collapsed_) return;
  // Zeros accumulate on the left endpoint a/b, ones on c/d.
  if (symbol == 0) {
    c_ = a_;
    d_ = b_;
  } else {
    a_ = c_;
    b_ = d_;
  }
  collapsed_ = true;
}

bool MobiusInterval::exact() const noexcept {
  return std::max({a_, b_, c_, d_}) <= kExactLimit;
}

std::array<std::uint64_t, 4> MobiusInterval::integer_entries() const noexcept {
  return {static_cast<std::uint64_t>(a_), static_cast<std::uint64_t>(b_),
          static_cast<std::uint64_t>(c_), static_cast<std::uint64_t>(d_)};
}

}  // namespace fractal_evt
