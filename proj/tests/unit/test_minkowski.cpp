#include <cmath>
#include <vector>

#include "doctest.h"
#include "fractal_evt/error.hpp"
#include "fractal_evt/cantor.hpp"
#include "fractal_evt/minkowski.hpp"
#include "fractal_evt/qmark.hpp"

using namespace fractal_evt;

namespace {

NeighborhoodCurve synthetic(const std::vector<double>& eps, auto&& log_mu) {
  NeighborhoodCurve c;
  for (double e : eps) {
    c.eps.push_back(e);
    c.log_mu.push_back(log_mu(e));
    c.mu_hat.push_back(std::exp(c.log_mu.back()));
    c.stderr.push_back(0.0);
  }
  return c;
}

const double kDim = 1.0 - std::log(2.0) / std::log(3.0);

}  // namespace

TEST_CASE("log grid") {
  const auto g = log_grid(1e-4, 1e-1, 4);
  REQUIRE(g.size() == 4);
  CHECK(g.front() == 1e-4);
  CHECK(g.back() == 1e-1);
  CHECK(g[1] == doctest::Approx(1e-3));
}

TEST_CASE("standard fit is exact on a pure power law") {
  const auto c = synthetic(log_grid(1e-6, 1e-1, 60),
                           [](double e) { return std::log(0.7) + 0.42 * std::log(e); });
  const ScalingFit f = fit_standard(c);
  CHECK(f.dimension == doctest::Approx(0.42).epsilon(1e-6));
  CHECK(f.content == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(f.residual_band < 1e-9);
  const auto short_curve = synthetic(log_grid(1e-3, 1e-1, 10), [](double e) { return std::log(e); });
  CHECK_THROWS_AS(fit_standard(short_curve), Error);
}

TEST_CASE("non-standard fit is exact on synthetic double exponentials") {
  for (double q : {1.0 / 3.0, 1.0}) {
    const auto c = synthetic(log_grid(1e-5, 1e-1, 80), [q](double e) {
      return std::log(3.5) - 0.8 * std::pow(e, -q);
    });
    const NonStandardFit f = fit_nonstandard(c);
    CHECK(f.exponent == doctest::Approx(q).epsilon(1e-6));
    CHECK(f.rate == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(f.prefactor == doctest::Approx(3.5).epsilon(1e-6));
    const NonStandardFit fixed = fit_nonstandard(c, {}, q);
    CHECK(fixed.rate == doctest::Approx(0.8).epsilon(1e-9));
  }
}

TEST_CASE("Lebesgue Cantor constants from the exact curve") {
  const auto c = neighborhood_curve(TernaryCantor{}, LebesgueMeasure{},
                                    log_grid(1e-8, 1e-2, 241), ExactMethod{});
  for (std::size_t i = 1; i < c.eps.size(); ++i) CHECK(c.mu_hat[i] >= c.mu_hat[i - 1]);
  const ScalingFit f = fit_standard(c);
  CHECK(std::abs(f.dimension - kDim) < 0.005);
  CHECK(std::abs(f.content - 2.5) / 2.5 < 0.05);
  CHECK(f.cesaro_periods >= 1.0);
  CHECK(f.residual_band < 0.1);
}

TEST_CASE("exact curve examples") {
  const double e = std::pow(3.0, -4) / 2;
  const auto c = neighborhood_curve(TernaryCantor{}, LebesgueMeasure{}, {e}, ExactMethod{});
  CHECK(c.mu_hat[0] == doctest::Approx(2 * std::pow(2.0 / 3.0, 4) - std::pow(3.0, -4)));
  const auto s = neighborhood_curve(Singleton{4}, QmarkMeasure{}, {1e-3}, ExactMethod{});
  CHECK(s.mu_hat[0] == doctest::Approx(interval_measure(0.25 - 1e-3, 0.25 + 1e-3)));
  const double ratio = s.mu_hat[0] / (std::pow(2.0, -1.25) * std::exp(-std::log(2.0) / 16e-3));
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
  CHECK_THROWS_AS(neighborhood_curve(HarmonicClosure{}, LebesgueMeasure{}, {1e-3}, ExactMethod{}),
                  Error);
  CHECK_THROWS_AS(neighborhood_curve(TernaryCantor{}, QmarkMeasure{}, {1e-2, 1e-3}, ExactMethod{}),
                  Error);
}

TEST_CASE("Monte Carlo agrees with the exact Lebesgue curve") {
  const auto grid = log_grid(1e-4, 1e-1, 16);
  const auto exact = neighborhood_curve(TernaryCantor{}, LebesgueMeasure{}, grid, ExactMethod{});
  MonteCarloMethod mc;
  mc.samples = 200000;
  mc.seed = 17;
  const auto est = neighborhood_curve(TernaryCantor{}, LebesgueMeasure{}, grid, mc, WorkerPool(2));
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(est.mu_hat[i] - exact.mu_hat[i]) <= 3 * est.stderr[i] + 1.0 / mc.samples);
  // Same samples at every grid point, so the estimate is monotone.
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(est.mu_hat[i] >= est.mu_hat[i - 1]);
}

TEST_CASE("question-mark Cantor curve: Monte Carlo against exact") {
  const auto grid = log_grid(1e-4, 1e-1, 10);
  const auto exact = neighborhood_curve(TernaryCantor{}, QmarkMeasure{}, grid, ExactMethod{});
  MonteCarloMethod mc;
  mc.samples = 100000;
  const auto est = neighborhood_curve(TernaryCantor{}, QmarkMeasure{}, grid, mc);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(est.mu_hat[i] - exact.mu_hat[i]) <= 3 * est.stderr[i] + 1.0 / mc.samples);
  // The construction-interval sum against Q differences at one scale.
  const double eps = 1e-3;
  double direct = 0.0, lo = -1.0, hi = -1.0;
  for (const auto& iv : construction_intervals(8)) {
    const double l = std::max(0.0, iv.lo - eps), h = std::min(1.0, iv.hi + eps);
    if (l > hi) {
      if (hi >= 0) direct += qmark_eval(hi) - qmark_eval(lo);
      lo = l;
      hi = h;
    } else {
      hi = h;
    }
  }
  direct += qmark_eval(hi) - qmark_eval(lo);
  // Level 8 intervals are 1.5e-4 wide, so the union at eps = 1e-3 is exact.
  CHECK(qmark_cantor_neighborhood(eps).to_double() == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("singleton 1/4 constants") {
  const auto c = neighborhood_curve(Singleton{4}, QmarkMeasure{}, log_grid(1e-4, 1e-2, 81),
                                    ExactMethod{});
  const NonStandardFit f = fit_nonstandard(c);
  CHECK(f.exponent == doctest::Approx(1.0).epsilon(0.05));
  CHECK(f.rate == doctest::Approx(std::log(2.0) / 16).epsilon(0.05));
  // The prefactor absorbs the log-periodic factor of the ball measure,
  // which sits about 12% below 2^-5/4 on this window.
  CHECK(f.prefactor == doctest::Approx(std::pow(2.0, -1.25)).epsilon(0.15));
}

TEST_CASE("harmonic closure constants") {
  const auto c = neighborhood_curve(HarmonicClosure{}, QmarkMeasure{}, log_grid(1e-6, 1e-1, 101),
                                    ExactMethod{});
  for (std::size_t i = 1; i < c.eps.size(); ++i) CHECK(c.log_mu[i] >= c.log_mu[i - 1]);
  for (double m : c.mu_hat) CHECK(m <= 1.0);
  const NonStandardFit f = fit_nonstandard(c);
  CHECK(std::abs(f.exponent - 1.0 / 3.0) / (1.0 / 3.0) <= 0.10);
  CHECK(std::abs(f.rate - 1.26) / 1.26 <= 0.15);
}

TEST_CASE("harmonic exact measure and asymptotic series") {
  const HarmonicMeasure h = harmonic_series_measure(1e-3);
  CHECK(std::abs(h.series - h.exact) / std::max(h.series, h.exact) <= 0.20);
  CHECK(harmonic_series_measure(0.09).exact >= 0.5);
  CHECK(harmonic_series_measure(1.0 / 12).exact >= 0.5);
  double prev = -kInfinity;
  for (double e = 1e-5; e <= 0.1; e *= 1.5) {
    const double v = harmonic_series_measure(e).log_exact;
    CHECK(v >= prev);
    CHECK(v <= 0.0);
    prev = v;
  }
  CHECK_THROWS_AS(harmonic_series_measure(0.2), Error);
  // Past the overlap scale the union contains [0, 1/2].
  CHECK(harmonic_neighborhood(0.1).to_double() >= 0.5);
}

TEST_CASE("saddle-point constants") {
  const SaddlePoint s = saddle_point_constants();
  CHECK(s.rate_theory == doctest::Approx(3 * std::log(2.0) * std::pow(2.0, -2.0 / 3.0)));
  CHECK(s.rate_theory == doctest::Approx(1.310).epsilon(1e-3));
  CHECK(s.spread < 0.02);
  CHECK(s.prefactor_numeric > 0.0);
  CHECK(std::abs(1.26 - s.rate_theory) / s.rate_theory < 0.10);
}
