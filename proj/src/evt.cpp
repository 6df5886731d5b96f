#include "fractal_evt/evt.hpp"

#include <cmath>
#include <numeric>

#include "fractal_evt/cantor.hpp"
#include "fractal_evt/rng.hpp"

namespace fractal_evt {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kInsufficientTailPoints, "degenerate regression");
  return {sxy / sxx, my - sxy / sxx * mx};
}

// Distance below which a point can still reach the level grid.
double screening_radius(const BlockMaximaConfig& cfg) {
  if (cfg.level_grid.empty()) return 0.0;
  const double floor = *std::min_element(cfg.level_grid.begin(), cfg.level_grid.end());
  return std::exp(-floor);
}

}  // namespace

void validate(const BlockMaximaConfig& cfg) {
  validate(cfg.map);
  validate(cfg.intensity);
  if (cfg.samples == 0)
    throw Error(ErrorCode::kInvalidArgument, "block maxima need at least one sample");
  if (cfg.block_lengths.empty())
    throw Error(ErrorCode::kInvalidArgument, "block maxima need block lengths");
  for (std::size_t i = 0; i < cfg.block_lengths.size(); ++i)
    if (cfg.block_lengths[i] == 0 ||
        (i > 0 && cfg.block_lengths[i] <= cfg.block_lengths[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, "block lengths must be strictly increasing");
}

std::vector<double> BlockMaxima::column(std::size_t block) const {
  std::vector<double> out(samples);
  for (std::uint64_t r = 0; r < samples; ++r) out[r] = at(r, block);
  return out;
}

BlockMaxima block_maxima(const BlockMaximaConfig& cfg, const WorkerPool& pool) {
  validate(cfg);
  const IntensitySpec& spec = cfg.intensity;
  if (const auto* tent = std::get_if<Tent>(&cfg.map)) {
    const double p = tent->p;
    return collect_block_maxima(cfg.block_lengths, cfg.samples, pool, [&](std::uint64_t r) {
      return [x = uniform_start(derive_seed(cfg.seed, r)), p, &spec]() mutable {
        const double f = evaluate(spec, x);
        x = tent_kernel(x, p);
        return f;
      };
    });
  }
  if (const auto* rot = std::get_if<Rotation>(&cfg.map)) {
    const long double omega = rot->omega;
    return collect_block_maxima(cfg.block_lengths, cfg.samples, pool, [&](std::uint64_t r) {
      return [x0 = uniform_start(derive_seed(cfg.seed, r)), omega, &spec,
              j = std::uint64_t{0}]() mutable {
        const double x = j == 0 ? x0 : rotation_kernel(x0, omega, j - 1);
        ++j;
        return evaluate(spec, x);
      };
    });
  }
  const Mobius mob = std::get<Mobius>(cfg.map);
  const double radius = screening_radius(cfg);
  const auto* distance_mode = std::get_if<LogDistanceMode>(&spec);
  // Refinement stops early once the enclosure is certified to sit farther
  // than `radius` from the target (the value then lies below every level),
  // or, for the ladder, once it lies inside a single gap (the order is then
  // exact).
  const auto stop = [radius, distance_mode](const Interval& iv) {
    if (distance_mode) return radius > 0.0 && min_distance_to_target(iv, distance_mode->target) > radius;
    return min_distance_to_cantor(iv) > 0.0;
  };
  return collect_block_maxima(cfg.block_lengths, cfg.samples, pool, [&](std::uint64_t r) {
    return [stream = SymbolStream(derive_seed(cfg.seed, r)), mob, &spec, &stop,
            j = std::uint64_t{0}]() mutable {
      const Interval iv = qmark_enclosure_until(stream, j, mob.tol, mob.max_bits, stop);
      ++j;
      return evaluate(spec, iv.midpoint());
    };
  });
}

double EmpiricalLaw::stderr_at(std::size_t l, std::size_t i) const noexcept {
  const double a = a_hat(l, i);
  return std::sqrt(a * (1.0 - a) / static_cast<double>(total));
}

EmpiricalLaw empirical_law(const BlockMaxima& maxima, const std::vector<double>& levels,
                           const ObservableForm& form, const Regime& regime,
                           double theta_ref) {
  if (maxima.samples == 0) throw Error(ErrorCode::kInvalidArgument, "empty block maxima");
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw Error(ErrorCode::kInvalidArgument, "levels must be sorted ascending");
  validate(regime);
  EmpiricalLaw law;
  law.levels = levels;
  law.block_lengths = maxima.block_lengths;
  law.total = maxima.samples;
  law.theta_ref = theta_ref;
  const std::size_t blocks = maxima.block_lengths.size();
  law.counts.assign(levels.size() * blocks, 0);
  law.tau.assign(levels.size() * blocks, 0.0);
  for (std::size_t i = 0; i < blocks; ++i) {
    std::vector<double> column = maxima.column(i);
    std::sort(column.begin(), column.end());
    const double n = static_cast<double>(maxima.block_lengths[i]);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double threshold = apply_form(form, levels[l]);
      law.counts[law.index(l, i)] = static_cast<std::uint64_t>(
          std::upper_bound(column.begin(), column.end(), threshold) - column.begin());
      law.tau[law.index(l, i)] = tau_of_level(regime, n, levels[l]);
    }
  }
  return law;
}

LawDeviation law_deviation(const EmpiricalLaw& law, double theta) {
  LawDeviation out;
  const std::size_t blocks = law.block_lengths.size();
  out.deviation.assign(law.counts.size(), 0.0);
  out.sup.assign(blocks, 0.0);
  out.sup_stderr.assign(blocks, 0.0);
  for (std::size_t i = 0; i < blocks; ++i) {
    for (std::size_t l = 0; l < law.levels.size(); ++l) {
      const double dev = std::abs(law.a_hat(l, i) - std::exp(-theta * law.tau_at(l, i)));
      out.deviation[law.index(l, i)] = dev;
      if (dev > out.sup[i]) {
        out.sup[i] = dev;
        out.sup_stderr[i] = law.stderr_at(l, i);
      }
    }
  }
  return out;
}

bool non_increasing_within(const std::vector<double>& values,
                           const std::vector<double>& errors, double slack) {
  int allowed = 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) continue;
    const double rise = values[i] - values[i - 1];
    if (allowed > 0 && rise <= slack * std::max(errors[i], errors[i - 1])) {
      --allowed;
      continue;
    }
    return false;
  }
  return true;
}

ThetaEstimate estimate_theta(const EmpiricalLaw& law, const ThetaOptions& options) {
  if (law.block_lengths.empty() || law.total == 0)
    throw Error(ErrorCode::kInsufficientGridCoverage, "empty law");
  const std::size_t col = law.block_lengths.size() - 1;
  std::vector<std::size_t> retained;
  for (std::size_t l = 0; l < law.levels.size(); ++l) {
    const double a = law.a_hat(l, col), tau = law.tau_at(l, col);
    if (a >= options.a_min && a <= options.a_max && tau >= options.tau_min &&
        tau <= options.tau_max)
      retained.push_back(l);
  }
  if (retained.size() < 5)
    throw Error(ErrorCode::kInsufficientGridCoverage,
                "fewer than 5 grid points in the estimation window");

  const auto slope = [&](const std::vector<std::uint64_t>& counts) {
    double num = 0.0, den = 0.0;
    for (std::size_t l : retained) {
      if (counts[l] == 0) continue;
      const double a = static_cast<double>(counts[l]) / static_cast<double>(law.total);
      const double tau = law.tau_at(l, col);
      num += tau * -std::log(a);
      den += tau * tau;
    }
    return num / den;
  };

  std::vector<std::uint64_t> counts(law.levels.size());
  for (std::size_t l = 0; l < law.levels.size(); ++l) counts[l] = law.counts[law.index(l, col)];

  ThetaEstimate out;
  out.theta = slope(counts);
  out.points = retained.size();
  out.n = law.block_lengths[col];

  // Resampling replicates only moves them between the level bins, so a
  // bootstrap draw is a histogram of J bin indices.
  if (options.bootstrap > 1) {
    CounterRng rng(options.seed);
    std::vector<double> draws;
    std::vector<std::uint64_t> hist(law.levels.size() + 1);
    std::vector<std::uint64_t> resampled(law.levels.size());
    for (int b = 0; b < options.bootstrap; ++b) {
      std::fill(hist.begin(), hist.end(), 0);
      for (std::uint64_t r = 0; r < law.total; ++r) {
        const std::uint64_t idx = rng.below(law.total);
        hist[static_cast<std::size_t>(std::upper_bound(counts.begin(), counts.end(), idx) -
                                      counts.begin())]++;
      }
      std::uint64_t running = 0;
      for (std::size_t l = 0; l < law.levels.size(); ++l) {
        running += hist[l];
        resampled[l] = running;
      }
      draws.push_back(slope(resampled));
    }
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
    double var = 0.0;
    for (double d : draws) var += (d - mean) * (d - mean);
    out.stderr = std::sqrt(var / static_cast<double>(draws.size() - 1));
  }
  return out;
}

std::vector<GumbelPoint> gumbel_normalize(const EmpiricalLaw& law, const Regime& regime) {
  validate(regime);
  std::vector<GumbelPoint> out;
  for (std::size_t i = 0; i < law.block_lengths.size(); ++i) {
    const double n = static_cast<double>(law.block_lengths[i]);
    for (std::size_t l = 0; l < law.levels.size(); ++l) {
      const double tau = tau_of_level(regime, n, law.levels[l]);
      if (!(tau > 0.0) || !std::isfinite(tau)) continue;
      const double y = -std::log(tau);
      out.push_back({law.block_lengths[i], law.levels[l], y, law.a_hat(l, i),
                     std::exp(-std::exp(-y))});
    }
  }
  return out;
}

TailFit frechet_weibull_check(const EmpiricalLaw& law, const ObservableForm& form,
                              double a_min, double a_max) {
  const auto* exponential = std::get_if<Exponential>(&form);
  const auto* bounded = std::get_if<Bounded>(&form);
  if (!exponential && !bounded)
    throw Error(ErrorCode::kInvalidArgument,
                "tail check needs an exponential (Frechet) or bounded (Weibull) form");
  const std::size_t col = law.block_lengths.size() - 1;
  std::vector<double> x, y;
  for (std::size_t l = 0; l < law.levels.size(); ++l) {
    const double a = law.a_hat(l, col);
    if (a < a_min || a > a_max) continue;
    const double f = apply_form(form, law.levels[l]);
    x.push_back(exponential ? std::log(f) : std::log(bounded->bound - f));
    y.push_back(std::log(-std::log(a)));
  }
  if (x.size() < 3)
    throw Error(ErrorCode::kInsufficientTailPoints, "fewer than 3 points in the tail window");
  const LineFit fit = least_squares(x, y);
  return {exponential ? -fit.slope : fit.slope, x.size()};
}

TailFit level_set_exponent(const BlockMaxima& maxima, const std::vector<double>& levels,
                           const ObservableForm& form, std::uint64_t min_count) {
  const auto it = std::find(maxima.block_lengths.begin(), maxima.block_lengths.end(), 1u);
  if (it == maxima.block_lengths.end())
    throw Error(ErrorCode::kInvalidArgument, "level-set exponent needs block length 1");
  std::vector<double> column =
      maxima.column(static_cast<std::size_t>(it - maxima.block_lengths.begin()));
  std::sort(column.begin(), column.end());
  std::vector<double> x, y;
  for (double level : levels) {
    const double f = apply_form(form, level);
    if (!(f > 0.0)) continue;
    const auto above = static_cast<std::uint64_t>(
        column.end() - std::lower_bound(column.begin(), column.end(), f));
    if (above < min_count) continue;
    x.push_back(std::log(f));
    y.push_back(std::log(static_cast<double>(above) / static_cast<double>(maxima.samples)));
  }
  if (x.size() < 3)
    throw Error(ErrorCode::kInsufficientTailPoints, "fewer than 3 populated level sets");
  return {-least_squares(x, y).slope, x.size()};
}

}  // namespace fractal_evt
