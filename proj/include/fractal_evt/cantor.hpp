#pragma once

#include <cstdint>
#include <vector>

#include "fractal_evt/mobius.hpp"

namespace fractal_evt {

/// Ternary digits examined before a point is declared a Cantor point.
inline constexpr int kTernaryScanDepth = 52;

/// Position of the first ternary digit 1, or infinite.
class GapOrder {
 public:
  static constexpr GapOrder infinite() noexcept { return GapOrder(); }
  explicit constexpr GapOrder(int order) noexcept : order_(order) {}

  constexpr bool is_infinite() const noexcept { return order_ == 0; }
  constexpr int value() const noexcept { return order_; }

  friend constexpr bool operator==(GapOrder, GapOrder) noexcept = default;

 private:
  constexpr GapOrder() noexcept = default;
  int order_ = 0;  // 0 encodes infinite
};

/// Open gap (left, left + length) removed at stage `order`.
struct GapDescriptor {
  int order = 1;
  double left = 1.0 / 3.0;
  double length = 1.0 / 3.0;

  double right() const noexcept { return left + length; }
};

/// Exact digit scan of a double. `offset` is the position of x inside its
/// gap as a fraction of the gap length, computed without rounding the
/// gap endpoints.
struct TernaryLocation {
  GapOrder order = GapOrder::infinite();
  long double prefix = 0.0L;  // value of the digits before the first 1
  double offset = 0.0;        // in (0,1) for points inside a gap
};

TernaryLocation ternary_location(double x);

GapOrder gap_order(double x);

/// Throws kNotInGap for Cantor points.
GapDescriptor locate_gap(double x);

/// Distance to the ternary Cantor set; 0 for points of infinite order.
double distance_to_cantor(double x);

/// Average of log d(x,K) over a gap: log(length) - 1 - log 2.
double mean_log_distance_on_gap(const GapDescriptor& gap);

/// Lebesgue measure of the eps-neighborhood of the Cantor set within [0,1].
double lebesgue_neighborhood_exact(double eps);

/// All gaps of order 1 .. max_order, by increasing order then position.
std::vector<GapDescriptor> enumerate_gaps(int max_order);

/// The 2^level closed intervals left after `level` removal stages.
std::vector<Interval> construction_intervals(int level);

/// Lower bound of d(x,K) over all x in [lo, hi].
double min_distance_to_cantor(const Interval& iv);

}  // namespace fractal_evt
