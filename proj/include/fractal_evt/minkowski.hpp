#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fractal_evt/intensity.hpp"
#include "fractal_evt/parallel.hpp"
#include "fractal_evt/scaled_real.hpp"

namespace fractal_evt {

inline constexpr double kLambda = 0.69314718055994530942;  // log 2

struct LebesgueMeasure {};
struct QmarkMeasure {};
using ReferenceMeasure = std::variant<LebesgueMeasure, QmarkMeasure>;

struct ExactMethod {};
struct MonteCarloMethod {
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  double tol = 1e-12;
};
using CurveMethod = std::variant<ExactMethod, MonteCarloMethod>;

/// mu(N_eps(K)) on an eps grid. log_mu is kept separately because the
/// question-mark curves fall far below the double range.
struct NeighborhoodCurve {
  std::vector<double> eps;
  std::vector<double> mu_hat;
  std::vector<double> log_mu;
  std::vector<double> stderr;
  std::string source;
};

/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

/// Exact curves exist for the Cantor set under both measures and for the
/// singleton and harmonic targets under the question-mark measure; Monte
/// Carlo works for every pair.
NeighborhoodCurve neighborhood_curve(const TargetSet& target, const ReferenceMeasure& measure,
                                     const std::vector<double>& eps_grid,
                                     const CurveMethod& method,
                                     const WorkerPool& pool = WorkerPool{});

/// Q-measure of the eps-neighborhood of the Cantor set: the 2^M surviving
/// construction intervals thickened by eps, with 3^-(M+1) <= 2 eps < 3^-M.
ScaledReal qmark_cantor_neighborhood(double eps);

/// Q-measure of the eps-neighborhood of {0} and all 1/k: isolated balls for
/// k < k_c plus one block [0, 1/k_c + eps] where the balls overlap.
ScaledReal harmonic_neighborhood(double eps);

struct FitWindow {
  double eps_min = 0.0;
  double eps_max = kInfinity;
};

struct ScalingFit {
  double dimension = 0.0;      // d_M
  double dimension_stderr = 0.0;  // regression standard error of the slope
  double content = 0.0;        // Cesaro-averaged prefactor
  double residual_band = 0.0;  // max |log(mu / (content eps^d))|
  double cesaro_periods = 0.0; // log-periods covered by the content average
  std::size_t points = 0;
};

/// Log-log slope plus the prefactor averaged over a whole number of
/// log-periods `period` at the top of the window.
ScalingFit fit_standard(const NeighborhoodCurve& curve, const FitWindow& window = {},
                        double period = 1.0986122886681098);

struct NonStandardFit {
  double prefactor = 0.0;  // B
  double rate = 0.0;       // D
  double exponent = 0.0;   // q
  double rms_residual = 0.0;
  std::size_t points = 0;
};

/// log mu = log B - D eps^-q by variable projection: (log B, D) are linear
/// for fixed q, and q minimizes the residual (or is held at `fixed_exponent`).
NonStandardFit fit_nonstandard(const NeighborhoodCurve& curve, const FitWindow& window = {},
                               std::optional<double> fixed_exponent = std::nullopt);

struct HarmonicMeasure {
  double exact = 0.0;       // double value of the exact union (may underflow)
  double log_exact = 0.0;
  double series = 0.0;      // 2 e^{-lambda/delta} + sum_k 2^{3-k-1/k} e^{-lambda/(k^2 eps)}
  double log_series = 0.0;
};

HarmonicMeasure harmonic_series_measure(double eps);

struct SaddlePoint {
  double rate_theory = 0.0;     // 3 log2 2^{-2/3}
  double prefactor_numeric = 0.0;
  double reference_eps = 0.0;
  double spread = 0.0;          // relative spread of g(k*) eps^{1/3} over the ladder
};

/// Minimizes g(k) = lambda (k + 1/k + 1/(k^2 eps)) over real k for each eps
/// of the ladder; the prefactor is the Laplace estimate at reference_eps.
SaddlePoint saddle_point_constants(const std::vector<double>& eps_ladder = {},
                                   double reference_eps = 3e-4);

}  // namespace fractal_evt
