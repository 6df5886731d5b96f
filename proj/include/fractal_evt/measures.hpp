#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "fractal_evt/error.hpp"
#include "fractal_evt/mobius.hpp"
#include "fractal_evt/rng.hpp"

namespace fractal_evt {

/// A point of the phase space [0,1].
class UnitPoint {
 public:
  constexpr UnitPoint() noexcept = default;
  explicit UnitPoint(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "unit point outside [0,1]");
  }

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

inline constexpr long double kGoldenRotation =
    0.618033988749894848204586834365638118L;

struct Tent {
  double p = 0.45;
};

struct Rotation {
  long double omega = kGoldenRotation;
  /// Largest admissible partial quotient among the first 20 of omega.
  std::uint64_t quotient_cap = 10000;
};

struct Mobius {
  double tol = 1e-12;
  std::uint64_t max_bits = 1000000;
};

using MapSpec = std::variant<Tent, Rotation, Mobius>;

/// Throws kInvalidArgument if the parameters violate the map invariants.
void validate(const MapSpec& map);

/// First `count` partial quotients of x in (0,1); stops early if the
/// expansion terminates.
std::vector<std::uint64_t> partial_quotients(long double x, int count);

inline double tent_kernel(double x, double p) noexcept {
  return x < p ? x / p : (1.0 - x) / (1.0 - p);
}

inline double rotation_kernel(double x, long double omega, std::uint64_t j) noexcept {
  long double t = static_cast<long double>(j + 1) * omega;
  t -= std::floor(t);
  long double r = static_cast<long double>(x) + t;
  if (r >= 1.0L) r -= 1.0L;
  return static_cast<double>(r);
}

inline double mobius_kernel(double x) noexcept {
  return x <= 0.5 ? x / (1.0 - x) : 2.0 - 1.0 / x;
}

UnitPoint tent_step(UnitPoint x, double p);

/// frac(x + (j+1) omega), the (j+1)-th rotation image of x.
UnitPoint rotation_step(UnitPoint x, long double omega, std::uint64_t j);

UnitPoint mobius_step(UnitPoint x);

/// Counter-based fair bit source: bit(i) depends only on (seed, i).
class SymbolStream {
 public:
  explicit constexpr SymbolStream(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  /// Bits 64w+1 ... 64w+64, least significant first.
  constexpr std::uint64_t word(std::uint64_t w) const noexcept {
    return splitmix64(seed_ ^ splitmix64(w ^ 0xd1b54a32d192ed03ULL));
  }

  /// Bit i >= 1.
  constexpr int bit(std::uint64_t i) const noexcept {
    return static_cast<int>((word((i - 1) / 64) >> ((i - 1) % 64)) & 1u);
  }

  /// Sequential run reader starting after bit `offset`. Runs are cut at
  /// 64-bit word boundaries and are never infinite.
  class Reader {
   public:
    Reader(const SymbolStream& stream, std::uint64_t offset) noexcept
        : stream_(&stream), next_word_(offset / 64) {
      load();
      const auto skip = static_cast<int>(offset % 64);
      bits_ = skip == 0 ? bits_ : bits_ >> skip;
      available_ -= skip;
    }

    SymbolRun next() noexcept {
      if (available_ == 0) load();
      const int symbol = static_cast<int>(bits_ & 1u);
      int length = symbol ? std::countr_one(bits_) : std::countr_zero(bits_);
      if (length > available_) length = available_;
      bits_ = length == 64 ? 0 : bits_ >> length;
      available_ -= length;
      return {symbol, static_cast<std::uint64_t>(length)};
    }

   private:
    void load() noexcept {
      bits_ = stream_->word(next_word_++);
      available_ = 64;
    }

    const SymbolStream* stream_;
    std::uint64_t next_word_;
    std::uint64_t bits_ = 0;
    int available_ = 0;
  };

  Reader reader(std::uint64_t offset) const noexcept { return Reader(*this, offset); }

 private:
  std::uint64_t seed_;
};

/// Explicit itinerary given as runs; the final run may be infinite. Reading
/// past the end of a finite itinerary raises kWindowExhausted.
class RunSequence {
 public:
  explicit RunSequence(std::vector<SymbolRun> runs);

  /// Run containing bit `pos` (1-based), trimmed to start at pos.
  SymbolRun run_at(std::uint64_t pos) const;

  class Reader {
   public:
    Reader(const RunSequence& seq, std::uint64_t offset) : seq_(&seq), pos_(offset + 1) {}
    SymbolRun next() {
      SymbolRun run = seq_->run_at(pos_);
      pos_ += run.length;
      return run;
    }

   private:
    const RunSequence* seq_;
    std::uint64_t pos_;
  };

  Reader reader(std::uint64_t offset) const { return Reader(*this, offset); }

 private:
  std::vector<SymbolRun> runs_;
  std::vector<std::uint64_t> starts_;  // first position of each run
};

/// Builds the Mobius image of bits offset+1, offset+2, ... until the
/// interval is narrower than tol or `stop(interval)` returns true. Returns
/// the final interval; throws kWindowExhausted after max_bits bits.
template <class Source, class Stop>
Interval qmark_enclosure_until(const Source& source, std::uint64_t offset, double tol,
                               std::uint64_t max_bits, Stop&& stop) {
  MobiusInterval word;
  auto reader = source.reader(offset);
  const double inverse_tol = 1.0 / tol;
  while (!word.narrower_than_reciprocal(inverse_tol)) {
    if (word.depth() >= max_bits)
      throw Error(ErrorCode::kWindowExhausted,
                  "symbolic window exhausted before reaching tolerance");
    const SymbolRun run = reader.next();
    if (run.infinite()) {
      word.append_infinite_run(run.symbol);
      break;
    }
    word.append_run(run.symbol, run.length);
    if (stop(word.image())) break;
  }
  return word.image();
}

template <class Source>
Interval qmark_enclosure(const Source& source, std::uint64_t offset, double tol = 1e-12,
                         std::uint64_t max_bits = 1000000) {
  return qmark_enclosure_until(source, offset, tol, max_bits,
                               [](const Interval&) { return false; });
}

/// Q^-1 of the binary word 0.b_{offset+1} b_{offset+2} ..., to within tol.
template <class Source>
UnitPoint qmark_point(const Source& source, std::uint64_t offset, double tol = 1e-12,
                      std::uint64_t max_bits = 1000000) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be positive");
  return UnitPoint(qmark_enclosure(source, offset, tol, max_bits).midpoint());
}

/// Lebesgue-distributed start for the tent map and the rotation.
struct UniformSeed {
  std::uint64_t seed = 0;
};

/// Question-mark-distributed start for the Mobius map.
struct SymbolicSeed {
  SymbolStream stream;
};

using InitialCondition = std::variant<UniformSeed, SymbolicSeed>;

/// Initial point of a UniformSeed.
inline double uniform_start(std::uint64_t seed) noexcept {
  return to_unit_interval(splitmix64(seed ^ 0x5851f42d4c957f2dULL));
}

/// Calls visit(j, x_j) for j = 0 .. n-1. Validates the map and the pairing
/// of map and initial condition first.
template <class Visit>
void for_each_orbit_point(const MapSpec& map, const InitialCondition& init,
                          std::uint64_t n, Visit&& visit) {
  validate(map);
  if (const auto* tent = std::get_if<Tent>(&map)) {
    const auto* seed = std::get_if<UniformSeed>(&init);
    if (!seed)
      throw Error(ErrorCode::kMeasureMapMismatch, "tent map needs a uniform seed");
    double x = uniform_start(seed->seed);
    for (std::uint64_t j = 0; j < n; ++j) {
      visit(j, x);
      x = tent_kernel(x, tent->p);
    }
  } else if (const auto* rot = std::get_if<Rotation>(&map)) {
    const auto* seed = std::get_if<UniformSeed>(&init);
    if (!seed)
      throw Error(ErrorCode::kMeasureMapMismatch, "rotation needs a uniform seed");
    const double x0 = uniform_start(seed->seed);
    if (n > 0) visit(0, x0);
    for (std::uint64_t j = 1; j < n; ++j) visit(j, rotation_kernel(x0, rot->omega, j - 1));
  } else {
    const auto& mob = std::get<Mobius>(map);
    const auto* seed = std::get_if<SymbolicSeed>(&init);
    if (!seed)
      throw Error(ErrorCode::kMeasureMapMismatch,
                  "Mobius map needs a symbolic (question-mark) seed");
    for (std::uint64_t j = 0; j < n; ++j)
      visit(j, qmark_enclosure(seed->stream, j, mob.tol, mob.max_bits).midpoint());
  }
}

std::vector<UnitPoint> trajectory(const MapSpec& map, const InitialCondition& init,
                                  std::uint64_t n);

}  // namespace fractal_evt
