#include "fractal_evt/cantor.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

#include "fractal_evt/error.hpp"

namespace fractal_evt {

namespace {

using uint128 = unsigned __int128;

enum class Want { kOrder, kOffset, kFull };

constexpr auto kInversePowers = [] {
  std::array<double, kTernaryScanDepth + 1> p{};
  double v = 1.0;
  for (auto& e : p) {
    e = v;
    v /= 3.0;
  }
  return p;
}();

// x = r / 2^shift. Each step multiplies by 3 and peels off the integer
// part; the digits before the first 1 are kept as a base-3 integer.
template <Want kWant, class Word>
TernaryLocation scan_digits(Word r, int shift) {
  const Word mask = (Word{1} << shift) - 1;
  TernaryLocation out;
  uint128 prefix = 0;
  for (int j = 1; j <= kTernaryScanDepth; ++j) {
    r *= 3;
    const auto digit = static_cast<unsigned>(r >> shift);
    r &= mask;
    if (digit == 1) {
      if (r == 0) return TernaryLocation{};  // x = prefix + 3^-j, a Cantor endpoint
      out.order = GapOrder(j);
      if constexpr (kWant != Want::kOrder)
        out.offset = std::ldexp(static_cast<double>(r), -shift);
      if constexpr (kWant == Want::kFull)
        out.prefix = static_cast<long double>(prefix) * std::pow(3.0L, -(j - 1));
      return out;
    }
    if constexpr (kWant == Want::kFull) prefix = 3 * prefix + digit;
  }
  return TernaryLocation{};
}

template <Want kWant>
TernaryLocation locate(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "gap order needs x in [0,1]");
  if (x == 0.0 || x == 1.0) return TernaryLocation{};
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const auto biased = static_cast<int>(bits >> 52);
  std::uint64_t mantissa = bits & ((std::uint64_t{1} << 52) - 1);
  int shift = 1074;  // subnormal
  if (biased != 0) {
    mantissa |= std::uint64_t{1} << 52;
    shift = 1075 - biased;
  }
  const int trailing = std::min(std::countr_zero(mantissa), shift);
  mantissa >>= trailing;
  shift -= trailing;
  if (shift <= 61) return scan_digits<kWant, std::uint64_t>(mantissa, shift);
  if (shift > 125) {
    // Below 2^-72 the first 45 digits are zero; dropping binary places
    // beyond 2^-125 perturbs only digits past the scan depth.
    const int drop = shift - 125;
    if (drop >= 64) return TernaryLocation{};
    mantissa >>= drop;
    shift = 125;
    if (mantissa == 0) return TernaryLocation{};
  }
  return scan_digits<kWant, uint128>(mantissa, shift);
}

}  // namespace

TernaryLocation ternary_location(double x) { return locate<Want::kFull>(x); }

GapOrder gap_order(double x) { return locate<Want::kOrder>(x).order; }

GapDescriptor locate_gap(double x) {
  const TernaryLocation loc = ternary_location(x);
  if (loc.order.is_infinite())
    throw Error(ErrorCode::kNotInGap, "point lies on the Cantor set at scan depth");
  const double length = std::pow(3.0, -loc.order.value());
  return {loc.order.value(), static_cast<double>(loc.prefix + length), length};
}

double distance_to_cantor(double x) {
  const TernaryLocation loc = locate<Want::kOffset>(x);
  if (loc.order.is_infinite()) return 0.0;
  return kInversePowers[static_cast<std::size_t>(loc.order.value())] *
         std::min(loc.offset, 1.0 - loc.offset);
}

double mean_log_distance_on_gap(const GapDescriptor& gap) {
  if (!(gap.length > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gap length must be positive");
  return std::log(gap.length) - 1.0 - std::log(2.0);
}

double lebesgue_neighborhood_exact(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  // Gaps longer than 2 eps keep an uncovered core of length 3^-m - 2 eps;
  // summing them gives (2/3)^M + 2 eps (2^M - 1) for M such stages.
  int stages = 0;
  while (std::pow(3.0, -(stages + 1)) > 2.0 * eps) ++stages;
  return std::min(1.0, std::pow(2.0 / 3.0, stages) + 2.0 * eps * (std::ldexp(1.0, stages) - 1.0));
}

std::vector<Interval> construction_intervals(int level) {
  if (level < 0 || level > 30)
    throw Error(ErrorCode::kInvalidArgument, "construction level must be in [0,30]");
  const std::uint64_t count = std::uint64_t{1} << level;
  std::uint64_t scale = 1;
  for (int i = 0; i < level; ++i) scale *= 3;
  std::vector<Interval> out;
  out.reserve(count);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    // Bit i of idx (from the top) chooses ternary digit 0 or 2 at stage i+1.
    std::uint64_t numerator = 0;
    for (int i = 0; i < level; ++i)
      numerator = 3 * numerator + 2 * ((idx >> (level - 1 - i)) & 1u);
    const double lo = static_cast<double>(numerator) / static_cast<double>(scale);
    const double hi = static_cast<double>(numerator + 1) / static_cast<double>(scale);
    out.push_back({lo, hi});
  }
  return out;
}

std::vector<GapDescriptor> enumerate_gaps(int max_order) {
  if (max_order < 1 || max_order > 30)
    throw Error(ErrorCode::kInvalidArgument, "gap order must be in [1,30]");
  std::vector<GapDescriptor> out;
  for (int m = 1; m <= max_order; ++m) {
    const double length = std::pow(3.0, -m);
    for (const Interval& iv : construction_intervals(m - 1))
      out.push_back({m, iv.lo + length, length});
  }
  return out;
}

double min_distance_to_cantor(const Interval& iv) {
  const TernaryLocation a = ternary_location(iv.lo);
  if (a.order.is_infinite()) return 0.0;
  const TernaryLocation b = ternary_location(iv.hi);
  if (!(a.order == b.order) || a.prefix != b.prefix) return 0.0;
  const double length = std::pow(3.0, -a.order.value());
  return length * std::min(a.offset, 1.0 - b.offset);
}

}  // namespace fractal_evt
