#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fractal_evt/error.hpp"
#include "fractal_evt/intensity.hpp"
#include "fractal_evt/measures.hpp"
#include "fractal_evt/parallel.hpp"

namespace fractal_evt {

struct BlockMaximaConfig {
  MapSpec map = Tent{};
  IntensitySpec intensity = LadderMode{};
  std::vector<std::uint64_t> block_lengths;  // strictly increasing
  std::uint64_t samples = 100000;            // J independent trajectories
  std::uint64_t seed = 1;
  /// Levels in the argument of the form (gap order m, or h = -log d).
  /// The Mobius sampler stops refining a point once it is certified to lie
  /// below the smallest level.
  std::vector<double> level_grid;
};

void validate(const BlockMaximaConfig& cfg);

/// Running maxima of f along J trajectories, recorded at every block length.
struct BlockMaxima {
  std::vector<std::uint64_t> block_lengths;
  std::uint64_t samples = 0;
  std::vector<double> values;          // values[r * blocks + i]
  std::uint64_t infinite_points = 0;   // observations with f = +inf

  double at(std::uint64_t replicate, std::size_t block) const noexcept {
    return values[replicate * block_lengths.size() + block];
  }
  std::vector<double> column(std::size_t block) const;
};

/// The replicate loop shared by every source. `make_source(r)` returns a
/// callable producing the observations f(x_0), f(x_1), ... of replicate r.
template <class MakeSource>
BlockMaxima collect_block_maxima(const std::vector<std::uint64_t>& block_lengths,
                                 std::uint64_t samples, const WorkerPool& pool,
                                 MakeSource&& make_source) {
  if (block_lengths.empty() || samples == 0)
    throw Error(ErrorCode::kInvalidArgument, "block maxima need block lengths and samples");
  for (std::size_t i = 0; i < block_lengths.size(); ++i)
    if (block_lengths[i] == 0 || (i > 0 && block_lengths[i] <= block_lengths[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, "block lengths must be strictly increasing");
  BlockMaxima out;
  out.block_lengths = block_lengths;
  out.samples = samples;
  const std::size_t blocks = block_lengths.size();
  out.values.assign(samples * blocks, 0.0);
  std::vector<std::uint64_t> infinite(samples, 0);
  pool.for_each_chunk(samples, 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto next = make_source(static_cast<std::uint64_t>(r));
      double running = -kInfinity;
      std::uint64_t j = 0;
      for (std::size_t i = 0; i < blocks; ++i) {
        for (; j < block_lengths[i]; ++j) {
          const double f = next();
          if (f == kInfinity) ++infinite[r];
          running = std::max(running, f);
        }
        out.values[r * blocks + i] = running;
      }
    }
  });
  for (auto c : infinite) out.infinite_points += c;
  return out;
}

/// Block maxima of the configured dynamics and intensity. Replicate r uses
/// the seed derive_seed(cfg.seed, r).
BlockMaxima block_maxima(const BlockMaximaConfig& cfg, const WorkerPool& pool = WorkerPool{});

/// Grid of empirical probabilities P(M_n <= form(level)).
struct EmpiricalLaw {
  std::vector<double> levels;
  std::vector<std::uint64_t> block_lengths;
  std::vector<std::uint64_t> counts;  // counts[l * blocks + i]
  std::vector<double> tau;            // same layout
  std::uint64_t total = 0;
  double theta_ref = 1.0;

  std::size_t index(std::size_t l, std::size_t i) const noexcept {
    return l * block_lengths.size() + i;
  }
  double a_hat(std::size_t l, std::size_t i) const noexcept {
    return static_cast<double>(counts[index(l, i)]) / static_cast<double>(total);
  }
  double stderr_at(std::size_t l, std::size_t i) const noexcept;
  double tau_at(std::size_t l, std::size_t i) const noexcept { return tau[index(l, i)]; }
};

/// Levels must be sorted ascending.
EmpiricalLaw empirical_law(const BlockMaxima& maxima, const std::vector<double>& levels,
                           const ObservableForm& form, const Regime& regime,
                           double theta_ref = 1.0);

struct LawDeviation {
  std::vector<double> deviation;  // |a_hat - exp(-theta tau)|, law layout
  std::vector<double> sup;        // per block length
  std::vector<double> sup_stderr; // binomial error at the maximizing level
};

LawDeviation law_deviation(const EmpiricalLaw& law, double theta);

/// True when `values` is non-increasing, allowing one rise no larger than
/// `slack` times the matching error.
bool non_increasing_within(const std::vector<double>& values,
                           const std::vector<double>& errors, double slack);

struct ThetaOptions {
  double a_min = 0.05, a_max = 0.95;
  double tau_min = 0.05, tau_max = 3.0;
  int bootstrap = 200;
  std::uint64_t seed = 0x7e57;
};

struct ThetaEstimate {
  double theta = 0.0;
  double stderr = 0.0;
  std::size_t points = 0;
  std::uint64_t n = 0;
};

/// -log a_hat regressed on tau through the origin at the largest n.
ThetaEstimate estimate_theta(const EmpiricalLaw& law, const ThetaOptions& options = {});

struct GumbelPoint {
  std::uint64_t n = 0;
  double level = 0.0;
  double y = 0.0;  // -log tau
  double a_hat = 0.0;
  double reference = 0.0;  // exp(-exp(-y))
};

std::vector<GumbelPoint> gumbel_normalize(const EmpiricalLaw& law, const Regime& regime);

struct TailFit {
  double exponent = 0.0;
  std::size_t points = 0;
};

/// Tail exponent of the maxima law at the largest n: for an Exponential
/// form log(-log A) is linear in log f with slope -exponent; for a Bounded
/// form it is linear in log(D - f) with slope +exponent.
TailFit frechet_weibull_check(const EmpiricalLaw& law, const ObservableForm& form,
                              double a_min = 0.02, double a_max = 0.98);

/// Exponent eta of P(f >= y) ~ y^-eta from the single-observation column
/// (block length 1), over levels with at least `min_count` exceedances.
TailFit level_set_exponent(const BlockMaxima& maxima, const std::vector<double>& levels,
                           const ObservableForm& form, std::uint64_t min_count = 100);

}  // namespace fractal_evt
