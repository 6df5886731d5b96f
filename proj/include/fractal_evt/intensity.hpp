#pragma once

#include <cstdint>
#include <limits>
#include <variant>

#include "fractal_evt/mobius.hpp"

namespace fractal_evt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Observable shapes s -> f(s), all strictly increasing.
struct Linear {};
struct Exponential {
  double beta = 1.5;
};
struct Bounded {
  double bound = 1.0;  // supremum D of the observable
  double gamma = 1.0;
};
using ObservableForm = std::variant<Linear, Exponential, Bounded>;

void validate(const ObservableForm& form);
double apply_form(const ObservableForm& form, double s) noexcept;
double invert_form(const ObservableForm& form, double f) noexcept;

struct TernaryCantor {};
struct Singleton {
  std::uint64_t k = 4;  // the point 1/k
};
struct HarmonicClosure {};  // {0} and every 1/k
using TargetSet = std::variant<TernaryCantor, Singleton, HarmonicClosure>;

void validate(const TargetSet& target);

/// f = form(m(x)), the Cantor ladder.
struct LadderMode {
  ObservableForm form = Linear{};
};
/// f = form(-log d(x, target)).
struct LogDistanceMode {
  TargetSet target = TernaryCantor{};
  ObservableForm form = Linear{};
};
using IntensitySpec = std::variant<LadderMode, LogDistanceMode>;

void validate(const IntensitySpec& spec);
const ObservableForm& form_of(const IntensitySpec& spec) noexcept;

double distance_to_target(double x, const TargetSet& target);

/// Lower bound of the distance to the target over a whole interval.
double min_distance_to_target(const Interval& iv, const TargetSet& target);

/// The argument s of the form: gap order, or -log distance; +inf on K.
double level_of(const IntensitySpec& spec, double x);

double evaluate(const IntensitySpec& spec, double x);

// Threshold regimes. Ladder levels are integer gap orders m with
// tau = n (2 delta)^m; the distance regimes use tau = n A e^{-d h} and
// tau = n B exp(-D e^{q h}).
struct LadderDiscrete {
  double delta = 1.0 / 3.0;
};
struct PowerLaw {
  double dimension = 0.0;
  double content = 0.0;
};
struct DoubleExp {
  double prefactor = 0.0;  // B
  double rate = 0.0;       // D
  double exponent = 1.0;   // q
};
using Regime = std::variant<LadderDiscrete, PowerLaw, DoubleExp>;

void validate(const Regime& regime);

/// Level h_n(tau). LadderDiscrete rounds to the nearest integer m; use
/// tau_of_level for the tau actually realized. DoubleExp throws
/// kDegenerateThreshold when n B / tau <= 1.
double threshold_schedule(const Regime& regime, double n, double tau);

double tau_of_level(const Regime& regime, double n, double level) noexcept;

}  // namespace fractal_evt
