#include "fractal_evt/minkowski.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "fractal_evt/cantor.hpp"
#include "fractal_evt/error.hpp"
#include "fractal_evt/measures.hpp"
#include "fractal_evt/qmark.hpp"
#include "fractal_evt/rng.hpp"

namespace fractal_evt {

namespace {

constexpr std::uint64_t kMaxHarmonicTerms = 1000000;

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
  double sxx = 0.0;
};

LinearFit regress(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  if (!(sxx > 0.0)) return fit;
  fit.sxx = sxx;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.rss += r * r;
  }
  return fit;
}

void require_grid(const std::vector<double>& eps) {
  if (eps.empty()) throw Error(ErrorCode::kInvalidArgument, "empty eps grid");
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(eps[i] > 0.0) || (i > 0 && eps[i] <= eps[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, "eps grid must be positive and increasing");
}

void push_exact(NeighborhoodCurve& curve, double eps, const ScaledReal& mu) {
  curve.eps.push_back(eps);
  curve.mu_hat.push_back(mu.to_double());
  curve.log_mu.push_back(mu.log());
  curve.stderr.push_back(0.0);
}

std::vector<std::size_t> window_points(const NeighborhoodCurve& curve, const FitWindow& w) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.eps.size(); ++i)
    if (curve.eps[i] >= w.eps_min && curve.eps[i] <= w.eps_max && std::isfinite(curve.log_mu[i]))
      idx.push_back(i);
  return idx;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2)
    throw Error(ErrorCode::kInvalidArgument, "log grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> out(points);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

ScaledReal qmark_cantor_neighborhood(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  int level = 0;
  while (std::pow(3.0, -(level + 1)) > 2.0 * eps) ++level;
  if (level > 24)
    throw Error(ErrorCode::kInvalidArgument, "eps too small for the exact Cantor sum");
  ScaledReal total;
  for (const Interval& iv : construction_intervals(level)) {
    const double lo = std::max(0.0, iv.lo - eps);
    const double hi = std::min(1.0, iv.hi + eps);
    total += interval_measure_scaled(exact_rational(lo), exact_rational(hi));
  }
  return total;
}

ScaledReal harmonic_neighborhood(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  // Balls about 1/k and 1/(k+1) overlap once 1/(k(k+1)) <= 2 eps.
  std::uint64_t kc = 1;
  while (1.0 / (static_cast<double>(kc) * static_cast<double>(kc + 1)) > 2.0 * eps) {
    if (++kc > kMaxHarmonicTerms)
      throw Error(ErrorCode::kTailNotConverged,
                  "harmonic neighborhood needs more than 1e6 isolated balls");
  }
  const double block_top = 1.0 / static_cast<double>(kc) + eps;
  ScaledReal total = block_top >= 1.0 ? ScaledReal::from_double(1.0)
                                      : qmark_scaled(exact_rational(block_top));
  for (std::uint64_t k = 1; k < kc; ++k) total += ball_measure(k, eps);
  return total;
}

NeighborhoodCurve neighborhood_curve(const TargetSet& target, const ReferenceMeasure& measure,
                                     const std::vector<double>& eps_grid,
                                     const CurveMethod& method, const WorkerPool& pool) {
  require_grid(eps_grid);
  validate(target);
  const bool qmark = std::holds_alternative<QmarkMeasure>(measure);
  NeighborhoodCurve curve;
  if (std::holds_alternative<ExactMethod>(method)) {
    curve.source = qmark ? "exact-qmark" : "exact-lebesgue";
    for (double eps : eps_grid) {
      ScaledReal mu;
      if (std::holds_alternative<TernaryCantor>(target)) {
        mu = qmark ? qmark_cantor_neighborhood(eps)
                   : ScaledReal::from_double(lebesgue_neighborhood_exact(eps));
      } else if (const auto* s = std::get_if<Singleton>(&target)) {
        if (qmark) {
          mu = ball_measure(s->k, eps);
        } else {
          const double c = 1.0 / static_cast<double>(s->k);
          mu = ScaledReal::from_double(std::min(1.0, c + eps) - std::max(0.0, c - eps));
        }
      } else {
        if (!qmark)
          throw Error(ErrorCode::kInvalidArgument,
                      "no exact Lebesgue curve for the harmonic closure");
        mu = harmonic_neighborhood(eps);
      }
      push_exact(curve, eps, mu);
    }
    return curve;
  }

  const auto& mc = std::get<MonteCarloMethod>(method);
  if (mc.samples == 0) throw Error(ErrorCode::kInvalidArgument, "Monte Carlo needs samples");
  curve.source = qmark ? "montecarlo-qmark" : "montecarlo-lebesgue";
  // One sample set serves the whole grid: sort the distances once and count.
  std::vector<double> distance(mc.samples);
  pool.for_each_chunk(mc.samples, 4096, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t seed = derive_seed(mc.seed, i);
      const double x = qmark ? qmark_enclosure(SymbolStream(seed), 0, mc.tol).midpoint()
                             : uniform_start(seed);
      distance[i] = distance_to_target(x, target);
    }
  });
  std::sort(distance.begin(), distance.end());
  const double total = static_cast<double>(mc.samples);
  for (double eps : eps_grid) {
    const auto inside = static_cast<double>(
        std::upper_bound(distance.begin(), distance.end(), eps) - distance.begin());
    const double p = inside / total;
    curve.eps.push_back(eps);
    curve.mu_hat.push_back(p);
    curve.log_mu.push_back(p > 0.0 ? std::log(p) : -kInfinity);
    curve.stderr.push_back(std::sqrt(p * (1.0 - p) / total));
  }
  return curve;
}

ScalingFit fit_standard(const NeighborhoodCurve& curve, const FitWindow& window, double period) {
  const auto idx = window_points(curve, window);
  if (idx.size() < 3) throw Error(ErrorCode::kInsufficientSpan, "fewer than 3 points in window");
  const double lo = curve.eps[idx.front()], hi = curve.eps[idx.back()];
  if (std::log10(hi / lo) < 3.0 - 1e-9)
    throw Error(ErrorCode::kInsufficientSpan, "fit window spans fewer than 3 decades");
  std::vector<double> x, y;
  for (std::size_t i : idx) {
    if (curve.stderr[i] > 0.1 * curve.mu_hat[i])
      throw Error(ErrorCode::kInsufficientSpan,
                  "relative standard error above 10% inside the fit window");
    x.push_back(std::log(curve.eps[i]));
    y.push_back(curve.log_mu[i]);
  }
  const LinearFit line = regress(x, y);
  ScalingFit fit;
  fit.dimension = line.slope;
  fit.points = idx.size();
  if (idx.size() > 2)
    fit.dimension_stderr =
        std::sqrt(line.rss / static_cast<double>(idx.size() - 2) / line.sxx);

  // Cesaro average of log(mu eps^-d) over whole periods ending at the top.
  const double top = x.back();
  const double periods = std::floor((top - x.front()) / period + 1e-9);
  const double start = periods >= 1.0 ? top - periods * period : x.front();
  double area = 0.0, length = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = std::max(x[i - 1], start), b = x[i];
    if (b <= a) continue;
    // Linear interpolation of the integrand between grid points.
    const auto g = [&](double u) {
      const double t = (u - x[i - 1]) / (x[i] - x[i - 1]);
      const double yi = y[i - 1] + t * (y[i] - y[i - 1]);
      return yi - fit.dimension * u;
    };
    area += 0.5 * (g(a) + g(b)) * (b - a);
    length += b - a;
  }
  const double log_content = area / length;
  fit.content = std::exp(log_content);
  fit.cesaro_periods = periods;
  for (std::size_t i = 0; i < x.size(); ++i)
    fit.residual_band =
        std::max(fit.residual_band, std::abs(y[i] - log_content - fit.dimension * x[i]));
  return fit;
}

NonStandardFit fit_nonstandard(const NeighborhoodCurve& curve, const FitWindow& window,
                               std::optional<double> fixed_exponent) {
  const auto idx = window_points(curve, window);
  if (idx.size() < 4) throw Error(ErrorCode::kFitDiverged, "fewer than 4 points in window");
  std::vector<double> log_eps, y;
  for (std::size_t i : idx) {
    log_eps.push_back(std::log(curve.eps[i]));
    y.push_back(curve.log_mu[i]);
  }
  // For fixed q the model is linear in (log B, D) with regressor -eps^-q.
  const auto project = [&](double q) {
    std::vector<double> x(log_eps.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = -std::exp(-q * log_eps[i]);
    return regress(x, y);
  };
  double q = 0.0;
  if (fixed_exponent) {
    q = *fixed_exponent;
    if (!(q > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fixed exponent must be positive");
  } else {
    // Coarse scan from q = 1 outward to bracket the minimum, then Brent.
    const double lo = std::log(0.02), hi = std::log(4.0);
    const int steps = 240;
    double best = std::log(1.0);
    double best_rss = project(1.0).rss;
    for (int s = 0; s <= steps; ++s) {
      const double u = lo + (hi - lo) * s / steps;
      const double rss = project(std::exp(u)).rss;
      if (rss < best_rss) {
        best_rss = rss;
        best = u;
      }
    }
    const double step = (hi - lo) / steps;
    const auto result = boost::math::tools::brent_find_minima(
        [&](double u) { return project(std::exp(u)).rss; }, best - step, best + step, 52);
    q = std::exp(result.first);
    // Brent stops near sqrt(machine epsilon) in q; polish all three
    // parameters jointly with Gauss-Newton steps that must lower the RSS.
    const LinearFit start = project(q);
    Eigen::Vector3d theta(start.intercept, start.slope, q);
    const auto residuals = [&](const Eigen::Vector3d& t) {
      Eigen::VectorXd r(log_eps.size());
      for (std::size_t i = 0; i < log_eps.size(); ++i)
        r[static_cast<Eigen::Index>(i)] = y[i] - (t[0] - t[1] * std::exp(-t[2] * log_eps[i]));
      return r;
    };
    double rss = residuals(theta).squaredNorm();
    for (int iter = 0; iter < 20; ++iter) {
      Eigen::MatrixXd jac(log_eps.size(), 3);
      for (std::size_t i = 0; i < log_eps.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double e = std::exp(-theta[2] * log_eps[i]);
        jac(row, 0) = 1.0;
        jac(row, 1) = -e;
        jac(row, 2) = theta[1] * log_eps[i] * e;
      }
      const Eigen::Vector3d step = jac.colPivHouseholderQr().solve(residuals(theta));
      const Eigen::Vector3d next = theta + step;
      const double next_rss = residuals(next).squaredNorm();
      if (!(next[2] > 0.0) || !(next_rss < rss)) break;
      theta = next;
      rss = next_rss;
    }
    q = theta[2];
  }
  const LinearFit line = project(q);
  NonStandardFit fit;
  fit.exponent = q;
  fit.rate = line.slope;
  fit.prefactor = std::exp(line.intercept);
  fit.points = idx.size();
  fit.rms_residual = std::sqrt(line.rss / static_cast<double>(idx.size()));
  if (!(fit.rate > 0.0) || !std::isfinite(fit.prefactor) || !(fit.prefactor > 0.0))
    throw Error(ErrorCode::kFitDiverged, "non-standard fit produced non-positive constants");
  return fit;
}

HarmonicMeasure harmonic_series_measure(double eps) {
  if (!(eps > 0.0 && eps <= 0.1))
    throw Error(ErrorCode::kInvalidArgument, "harmonic series needs eps in (0, 0.1]");
  HarmonicMeasure out;
  const ScaledReal exact = harmonic_neighborhood(eps);
  out.exact = exact.to_double();
  out.log_exact = exact.log();

  const double delta = std::sqrt(eps / 2.0);
  const auto k_eps = static_cast<std::uint64_t>(std::floor(std::sqrt(2.0 / eps)));
  ScaledReal series = ScaledReal::from_log(std::log(2.0) - kLambda / delta);
  for (std::uint64_t k = 2; k <= k_eps; ++k)
    series += ScaledReal::from_log(BallAsymptotic::for_center(k).log_value(eps));
  out.series = series.to_double();
  out.log_series = series.log();
  return out;
}

SaddlePoint saddle_point_constants(const std::vector<double>& eps_ladder,
                                   double reference_eps) {
  const std::vector<double> ladder = eps_ladder.empty() ? log_grid(1e-6, 1e-3, 13) : eps_ladder;
  const auto exponent = [](double k, double eps) {
    return kLambda * (k + 1.0 / k + 1.0 / (k * k * eps));
  };
  const auto minimize = [&](double eps) {
    const double guess = std::cbrt(2.0 / eps);
    return boost::math::tools::brent_find_minima(
        [&](double k) { return exponent(k, eps); }, 1.0, 10.0 * guess + 10.0, 60);
  };
  SaddlePoint out;
  out.rate_theory = 3.0 * kLambda * std::pow(2.0, -2.0 / 3.0);
  double lo = kInfinity, hi = -kInfinity;
  for (double eps : ladder) {
    const double scaled = minimize(eps).second * std::cbrt(eps);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  out.spread = (hi - lo) / lo;
  out.reference_eps = reference_eps;
  const auto [k_star, g_star] = minimize(reference_eps);
  const double curvature =
      kLambda * (2.0 / (k_star * k_star * k_star) +
                 6.0 / (k_star * k_star * k_star * k_star * reference_eps));
  out.prefactor_numeric = 8.0 * std::sqrt(2.0 * 3.14159265358979323846 / curvature) *
                          std::exp(-(g_star - out.rate_theory / std::cbrt(reference_eps)));
  return out;
}

}  // namespace fractal_evt
