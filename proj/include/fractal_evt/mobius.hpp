#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace fractal_evt {

/// A maximal block of equal binary symbols. `length == 0` encodes an
/// infinite run (an eventually constant itinerary).
struct SymbolRun {
  int symbol = 0;
  std::uint64_t length = 0;

  bool infinite() const noexcept { return length == 0; }
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return lo + 0.5 * (hi - lo); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Image of [0,1] under a composition of the inverse branches of the
/// Farey map, w0(x) = x/(1+x) and w1(x) = 1/(2-x).
///
/// The image of a word is the Stern-Brocot interval [a/b, c/d] with
/// bc - ad = 1, so the state is the column matrix [[a c], [b d]]. A run of
/// r zeros replaces c/d by (ra+c)/(rb+d), which is x -> x/(1+rx) applied
/// on the right; a run of r ones replaces a/b by (a+rc)/(b+rd). Entries are
/// held as doubles: they are exact integers up to 2^53, after which the
/// state continues in rounded floating point (still nested, still
/// enclosing the limit point).
class MobiusInterval {
 public:
  /// Append `length` copies of `symbol` (length >= 1).
  void append_run(int symbol, std::uint64_t length) noexcept {
    if (collapsed_ || length == 0) return;
    depth_ += length;
    const double r = static_cast<double>(length);
    if (symbol == 0) {
      c_ += r * a_;
      d_ += r * b_;
    } else {
      a_ += r * c_;
      b_ += r * d_;
    }
  }

  /// Append an infinite run; the interval collapses onto its limit endpoint.
  void append_infinite_run(int symbol) noexcept;

  Interval image() const noexcept { return {a_ / b_, c_ / d_}; }

  /// hi - lo, computed from the determinant identity 1/(b d).
  double width() const noexcept { return collapsed_ ? 0.0 : 1.0 / (b_ * d_); }

  /// True once the interval is narrower than 1/inverse_tol.
  bool narrower_than_reciprocal(double inverse_tol) const noexcept {
    return collapsed_ || b_ * d_ > inverse_tol;
  }

  /// Number of binary symbols absorbed (the dyadic depth of the word).
  std::uint64_t depth() const noexcept { return depth_; }

  bool collapsed() const noexcept { return collapsed_; }

  /// Whether every entry is still an exact integer.
  bool exact() const noexcept;

  /// Integer matrix entries {a, b, c, d}; meaningful only while exact().
  std::array<std::uint64_t, 4> integer_entries() const noexcept;

 private:
  bool collapsed_ = false;
  double a_ = 0, b_ = 1, c_ = 1, d_ = 1;
  std::uint64_t depth_ = 0;
};

/// MobiusInterval that also records its run decomposition.
class MobiusWord {
 public:
  void append(const SymbolRun& run) {
    runs_.push_back(run);
    if (run.infinite())
      interval_.append_infinite_run(run.symbol);
    else
      interval_.append_run(run.symbol, run.length);
  }

  std::span<const SymbolRun> runs() const noexcept { return runs_; }
  const MobiusInterval& interval() const noexcept { return interval_; }
  Interval image() const noexcept { return interval_.image(); }

 private:
  std::vector<SymbolRun> runs_;
  MobiusInterval interval_;
};

}  // namespace fractal_evt
