#include "fractal_evt/intensity.hpp"

#include <algorithm>
#include <cmath>

#include "fractal_evt/cantor.hpp"
#include "fractal_evt/error.hpp"

namespace fractal_evt {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* message) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, message);
}

// Index k >= 1 with 1/(k+1) < x <= 1/k, for x in (0,1].
double harmonic_cell(double x) {
  double k = std::max(1.0, std::floor(1.0 / x));
  if (x > 1.0 / k) k -= 1.0;
  if (!(x > 1.0 / (k + 1.0))) k += 1.0;
  return std::max(1.0, k);
}

}  // namespace

void validate(const ObservableForm& form) {
  std::visit(Overloaded{[](const Linear&) {},
                        [](const Exponential& e) {
                          require(e.beta > 0.0, "exponential form needs beta > 0");
                        },
                        [](const Bounded& b) {
                          require(b.bound > 0.0 && b.gamma > 0.0,
                                  "bounded form needs D > 0 and gamma > 0");
                        }},
             form);
}

double apply_form(const ObservableForm& form, double s) noexcept {
  return std::visit(
      Overloaded{[&](const Linear&) { return s; },
                 [&](const Exponential& e) { return std::exp(s / e.beta); },
                 [&](const Bounded& b) { return b.bound - std::exp(-s / b.gamma); }},
      form);
}

double invert_form(const ObservableForm& form, double f) noexcept {
  return std::visit(
      Overloaded{[&](const Linear&) { return f; },
                 [&](const Exponential& e) { return e.beta * std::log(f); },
                 [&](const Bounded& b) { return -b.gamma * std::log(b.bound - f); }},
      form);
}

void validate(const TargetSet& target) {
  if (const auto* s = std::get_if<Singleton>(&target))
    require(s->k >= 2, "singleton target 1/k needs k >= 2");
}

void validate(const IntensitySpec& spec) {
  std::visit(Overloaded{[](const LadderMode& m) { validate(m.form); },
                        [](const LogDistanceMode& m) {
                          validate(m.form);
                          validate(m.target);
                        }},
             spec);
}

const ObservableForm& form_of(const IntensitySpec& spec) noexcept {
  if (const auto* m = std::get_if<LadderMode>(&spec)) return m->form;
  return std::get<LogDistanceMode>(spec).form;
}

double distance_to_target(double x, const TargetSet& target) {
  require(x >= 0.0 && x <= 1.0, "distance needs x in [0,1]");
  return std::visit(
      Overloaded{[&](const TernaryCantor&) { return distance_to_cantor(x); },
                 [&](const Singleton& s) {
                   return std::abs(x - 1.0 / static_cast<double>(s.k));
                 },
                 [&](const HarmonicClosure&) {
                   if (x == 0.0) return 0.0;
                   const double k = harmonic_cell(x);
                   const double below = x - 1.0 / (k + 1.0);
                   const double above = 1.0 / k - x;
                   return std::max(0.0, std::min({x, below, above}));
                 }},
      target);
}

double min_distance_to_target(const Interval& iv, const TargetSet& target) {
  return std::visit(
      Overloaded{[&](const TernaryCantor&) { return min_distance_to_cantor(iv); },
                 [&](const Singleton& s) {
                   const double c = 1.0 / static_cast<double>(s.k);
                   if (iv.lo <= c && c <= iv.hi) return 0.0;
                   return std::min(std::abs(iv.lo - c), std::abs(iv.hi - c));
                 },
                 [&](const HarmonicClosure&) {
                   if (iv.lo <= 0.0) return 0.0;
                   const double k = harmonic_cell(iv.lo);
                   const double top = 1.0 / k;
                   if (iv.hi >= top) return 0.0;
                   return std::min(iv.lo - 1.0 / (k + 1.0), top - iv.hi);
                 }},
      target);
}

double level_of(const IntensitySpec& spec, double x) {
  if (std::holds_alternative<LadderMode>(spec)) {
    const GapOrder m = gap_order(x);
    return m.is_infinite() ? kInfinity : static_cast<double>(m.value());
  }
  const double d = distance_to_target(x, std::get<LogDistanceMode>(spec).target);
  return d > 0.0 ? -std::log(d) : kInfinity;
}

double evaluate(const IntensitySpec& spec, double x) {
  return apply_form(form_of(spec), level_of(spec, x));
}

void validate(const Regime& regime) {
  std::visit(Overloaded{[](const LadderDiscrete& r) {
                          require(r.delta > 0.0 && r.delta < 0.5,
                                  "ladder regime needs 0 < delta < 1/2");
                        },
                        [](const PowerLaw& r) {
                          require(r.dimension > 0.0 && r.content > 0.0,
                                  "power-law regime needs positive dimension and content");
                        },
                        [](const DoubleExp& r) {
                          require(r.prefactor > 0.0 && r.rate > 0.0 && r.exponent > 0.0,
                                  "double-exponential regime needs B, D, q > 0");
                        }},
             regime);
}

double threshold_schedule(const Regime& regime, double n, double tau) {
  validate(regime);
  require(n > 0.0 && tau > 0.0, "threshold needs n > 0 and tau > 0");
  return std::visit(
      Overloaded{[&](const LadderDiscrete& r) {
                   return std::round(std::log(n / tau) / -std::log(2.0 * r.delta));
                 },
                 [&](const PowerLaw& r) {
                   return std::log(r.content * n / tau) / r.dimension;
                 },
                 [&](const DoubleExp& r) {
                   const double inner = std::log(n * r.prefactor / tau);
                   if (!(inner > 0.0))
                     throw Error(ErrorCode::kDegenerateThreshold,
                                 "n B / tau must exceed 1 for a double-exponential threshold");
                   return std::log(inner / r.rate) / r.exponent;
                 }},
      regime);
}

double tau_of_level(const Regime& regime, double n, double level) noexcept {
  if (level == kInfinity) return 0.0;
  return std::visit(
      Overloaded{[&](const LadderDiscrete& r) { return n * std::pow(2.0 * r.delta, level); },
                 [&](const PowerLaw& r) {
                   return n * r.content * std::exp(-r.dimension * level);
                 },
                 [&](const DoubleExp& r) {
                   return n * r.prefactor * std::exp(-r.rate * std::exp(r.exponent * level));
                 }},
      regime);
}

}  // namespace fractal_evt
