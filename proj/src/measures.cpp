#include "fractal_evt/measures.hpp"

#include <algorithm>
#include <string>

namespace fractal_evt {

std::vector<std::uint64_t> partial_quotients(long double x, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) {
    if (x <= 0.0L) break;
    const long double inv = 1.0L / x;
    const long double a = std::floor(inv);
    out.push_back(a > 1e18L ? std::uint64_t{1000000000000000000ULL}
                            : static_cast<std::uint64_t>(a));
    x = inv - a;
  }
  return out;
}

void validate(const MapSpec& map) {
  if (const auto* tent = std::get_if<Tent>(&map)) {
    if (!(tent->p > 0.0 && tent->p < 1.0))
      throw Error(ErrorCode::kInvalidArgument, "tent parameter p must lie in (0,1)");
  } else if (const auto* rot = std::get_if<Rotation>(&map)) {
    if (!(rot->omega > 0.0L && rot->omega < 1.0L))
      throw Error(ErrorCode::kInvalidArgument, "rotation number must lie in (0,1)");
    const auto quotients = partial_quotients(rot->omega, 20);
    if (quotients.size() < 20)
      throw Error(ErrorCode::kInvalidArgument,
                  "rotation number is rational at stored precision");
    for (auto a : quotients)
      if (a > rot->quotient_cap)
        throw Error(ErrorCode::kInvalidArgument,
                    "rotation number is too close to a small-denominator rational "
                    "(partial quotient " + std::to_string(a) + ")");
  } else {
    const auto& mob = std::get<Mobius>(map);
    if (!(mob.tol > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "Mobius sampler tol must be positive");
    if (mob.max_bits == 0)
      throw Error(ErrorCode::kInvalidArgument, "Mobius sampler needs a positive bit cap");
  }
}

UnitPoint tent_step(UnitPoint x, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "tent parameter p must lie in (0,1)");
  return UnitPoint(tent_kernel(x, p));
}

UnitPoint rotation_step(UnitPoint x, long double omega, std::uint64_t j) {
  return UnitPoint(rotation_kernel(x, omega, j));
}

UnitPoint mobius_step(UnitPoint x) { return UnitPoint(mobius_kernel(x)); }

RunSequence::RunSequence(std::vector<SymbolRun> runs) : runs_(std::move(runs)) {
  std::uint64_t pos = 1;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (runs_[i].symbol != 0 && runs_[i].symbol != 1)
      throw Error(ErrorCode::kInvalidArgument, "symbols must be 0 or 1");
    if (runs_[i].infinite() && i + 1 != runs_.size())
      throw Error(ErrorCode::kInvalidArgument, "only the last run may be infinite");
    starts_.push_back(pos);
    pos += runs_[i].length;
  }
}

SymbolRun RunSequence::run_at(std::uint64_t pos) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), pos);
  if (it == starts_.begin())
    throw Error(ErrorCode::kInvalidArgument, "bit positions start at 1");
  const auto i = static_cast<std::size_t>(it - starts_.begin()) - 1;
  const SymbolRun& run = runs_[i];
  if (run.infinite()) return run;
  const std::uint64_t used = pos - starts_[i];
  if (used >= run.length)
    throw Error(ErrorCode::kWindowExhausted, "finite itinerary read past its end");
  return {run.symbol, run.length - used};
}

std::vector<UnitPoint> trajectory(const MapSpec& map, const InitialCondition& init,
                                  std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "trajectory length must be positive");
  std::vector<UnitPoint> out;
  out.reserve(n);
  for_each_orbit_point(map, init, n,
                       [&](std::uint64_t, double x) { out.emplace_back(x); });
  return out;
}

}  // namespace fractal_evt
