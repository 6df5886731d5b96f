#include "fractal_evt/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "fractal_evt/cantor.hpp"
#include "fractal_evt/error.hpp"
#include "fractal_evt/evt.hpp"
#include "fractal_evt/minkowski.hpp"
#include "fractal_evt/qmark.hpp"

namespace fractal_evt::experiment {

namespace {

using json = nlohmann::json;

const double kCantorDimension = 1.0 - std::log(2.0) / std::log(3.0);

// Shortest round-trip form, used for parameter defaults.
std::string format_real(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

[[noreturn]] void bad(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // Also accept integral scientific notation such as 1e5.
  double d = 0.0;
  const auto [dptr, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (dec == std::errc() && dptr == s.data() + s.size() && d >= 0.0 && d <= 0x1p53 &&
      d == std::floor(d))
    return static_cast<std::uint64_t>(d);
  return std::nullopt;
}

std::optional<long double> parse_real(std::string_view s) {
  const std::string str(s);
  if (str.empty()) return std::nullopt;
  char* end = nullptr;
  const long double v = std::strtold(str.c_str(), &end);
  if (end != str.c_str() + str.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::vector<std::uint64_t>> parse_count_list(std::string_view s) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos
                                                                           : comma - start));
    const auto v = parse_count(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void check_value(const ParamSpec& spec, const std::string& value) {
  bool ok = false;
  switch (spec.kind) {
    case ParamKind::kCount: ok = parse_count(value).has_value(); break;
    case ParamKind::kReal: ok = parse_real(value).has_value(); break;
    case ParamKind::kCountList: ok = parse_count_list(value).has_value(); break;
    case ParamKind::kChoice:
      ok = std::find(spec.choices.begin(), spec.choices.end(), value) != spec.choices.end();
      break;
  }
  if (!ok) bad("parameter " + spec.key + " has an invalid value '" + value + "'");
}

// ---- parameter tables ------------------------------------------------------

ParamSpec count(std::string key, std::uint64_t v) {
  return {std::move(key), ParamKind::kCount, std::to_string(v), {}};
}
ParamSpec real(std::string key, double v) {
  return {std::move(key), ParamKind::kReal, format_real(v), {}};
}
ParamSpec real_text(std::string key, std::string v) {
  return {std::move(key), ParamKind::kReal, std::move(v), {}};
}
ParamSpec list(std::string key, std::string v) {
  return {std::move(key), ParamKind::kCountList, std::move(v), {}};
}
ParamSpec choice(std::string key, std::vector<std::string> choices) {
  std::string first = choices.front();
  return {std::move(key), ParamKind::kChoice, std::move(first), std::move(choices)};
}

const char* const kOmega = "0.618033988749894848204586834365638118";

std::vector<ParamSpec> evt_params(const char* blocks) {
  return {count("samples", 100000), list("block_lengths", blocks), count("theta.bootstrap", 200)};
}

std::vector<ParamSpec> tau_params() {
  return {real("tau.min", 0.05), real("tau.max", 5.0), count("tau.points", 12)};
}

std::vector<ParamSpec> join(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<ParamSpec> ladder_params(bool rotation) {
  auto p = evt_params("1,10,100,1000,10000");
  p.push_back(rotation ? real_text("rotation.omega", kOmega) : real("tent.p", 0.45));
  return join(p, {count("ladder.max_level", 32), count("ladder.check_max_level", 12),
                  count("ladder.check_min_n", 100), real("form.beta", 1.5),
                  real("form.gamma", 1.0), real("form.bound", 1.0)});
}

const std::map<std::string, std::vector<ParamSpec>, std::less<>>& tables() {
  static const std::map<std::string, std::vector<ParamSpec>, std::less<>> t = {
      {"ladder-tent", ladder_params(false)},
      {"ladder-rotation", ladder_params(true)},
      {"cantor-dist-rotation",
       join(join(evt_params("1,10,100,1000,10000"), tau_params()),
            {real_text("rotation.omega", kOmega), real("regime.dimension", kCantorDimension),
             real("regime.content", 2.5), real("eps.min", 1e-8), real("eps.max", 1e-2),
             count("eps.points", 241)})},
      {"qmark-cantor-content",
       join(join(evt_params("1,10,100,1000"), tau_params()),
            {real("mobius.tol", 1e-15), count("mc.samples", 1000000), real("eps.min", 1e-5),
             real("eps.max", 1e-1), count("eps.points", 41), real("exact.eps_min", 1e-8),
             real("exact.eps_max", 1e-5), real("regime.dimension", kCantorDimension),
             real("regime.content", 1.0)})},
      {"rare-singleton",
       join(join(evt_params("1,10,100,1000,10000"), tau_params()),
            {real("mobius.tol", 1e-12), count("singleton.k", 4), real("eps.min", 1e-4),
             real("eps.max", 1e-2), count("eps.points", 81),
             choice("regime", {"fitted", "theory"})})},
      {"harmonic-closure",
       join(join(evt_params("1,10,100,1000,10000"), tau_params()),
            {real("mobius.tol", 1e-12), real("eps.min", 1e-6), real("eps.max", 1e-1),
             count("eps.points", 101), choice("regime", {"reported", "fitted", "fixed-q"}),
             real("regime.prefactor", 24.61), real("regime.rate", 1.26),
             real("regime.exponent", 1.0 / 3.0)})},
      {"minkowski-scan",
       {count("mc.samples", 1000000), real("mobius.tol", 1e-12), count("singleton.k", 4),
        count("eps.points_per_decade", 40)}},
  };
  return t;
}

const std::set<std::string, std::less<>> kReserved = {"seed", "workers", "out"};

const ParamSpec* find_param(std::string_view scenario, std::string_view key) {
  for (const auto& p : parameters(scenario))
    if (p.key == key) return &p;
  return nullptr;
}

// Splits "scenario.key" when the prefix names a scenario.
std::optional<std::pair<std::string, std::string>> qualified(std::string_view key) {
  const auto dot = key.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  const auto prefix = key.substr(0, dot);
  if (tables().find(prefix) == tables().end()) return std::nullopt;
  return std::pair{std::string(prefix), std::string(key.substr(dot + 1))};
}

// ---- shared pieces -------------------------------------------------------

json check(double value, double target, double tolerance, bool relative) {
  const double err = relative ? std::abs(value - target) / std::abs(target)
                              : std::abs(value - target);
  return {{"value", value},
          {"target", target},
          {"tolerance", tolerance},
          {"relative", relative},
          {"pass", std::isfinite(value) && err <= tolerance}};
}

json check_range(double value, double lo, double hi) {
  return {{"value", value}, {"min", lo}, {"max", hi}, {"pass", value >= lo && value <= hi}};
}

ThetaOptions theta_options(const Parameters& p, std::uint64_t seed) {
  ThetaOptions o;
  o.bootstrap = static_cast<int>(p.count("theta.bootstrap"));
  o.seed = derive_seed(seed, 0xb007);
  return o;
}

json theta_json(const ThetaEstimate& t) {
  return {{"value", t.theta}, {"stderr", t.stderr}, {"points", t.points}, {"n", t.n}};
}

json try_theta(const EmpiricalLaw& law, const ThetaOptions& options,
               std::optional<ThetaEstimate>* out = nullptr) {
  try {
    const ThetaEstimate t = estimate_theta(law, options);
    if (out) *out = t;
    return theta_json(t);
  } catch (const Error& e) {
    return {{"error", std::string(error_code_name(e.code()))}, {"message", e.what()}};
  }
}

Table law_table(const EmpiricalLaw& law, double theta) {
  const LawDeviation dev = law_deviation(law, theta);
  Table t{kLawHeader, {}};
  for (std::size_t l = 0; l < law.levels.size(); ++l)
    for (std::size_t i = 0; i < law.block_lengths.size(); ++i) {
      const double tau = law.tau_at(l, i);
      t.rows.push_back({law.levels[l], static_cast<double>(law.block_lengths[i]), tau,
                        law.a_hat(l, i), law.stderr_at(l, i), std::exp(-theta * tau),
                        dev.deviation[law.index(l, i)]});
    }
  return t;
}

// Sup deviation over levels up to `max_level` at every block length >= min_n.
json sup_deviation(const EmpiricalLaw& law, double theta, double max_level,
                   std::uint64_t min_n, double threshold, json& checks,
                   const std::string& name) {
  const LawDeviation dev = law_deviation(law, theta);
  json rows = json::array();
  std::vector<double> sups, errs;
  for (std::size_t i = 0; i < law.block_lengths.size(); ++i) {
    double sup = 0.0, err = 0.0;
    for (std::size_t l = 0; l < law.levels.size(); ++l) {
      if (law.levels[l] > max_level) continue;
      const double d = dev.deviation[law.index(l, i)];
      if (d > sup) {
        sup = d;
        err = law.stderr_at(l, i);
      }
    }
    rows.push_back({{"n", law.block_lengths[i]}, {"sup", sup}, {"stderr", err}});
    if (law.block_lengths[i] >= min_n) {
      sups.push_back(sup);
      errs.push_back(err);
    }
  }
  if (!sups.empty()) {
    checks[name + "_decreasing"] = {{"pass", non_increasing_within(sups, errs, 2.0)}};
    checks[name + "_final"] = {{"value", sups.back()}, {"max", threshold},
                               {"pass", sups.back() < threshold}};
  }
  return rows;
}

BlockMaxima transform_maxima(const BlockMaxima& m, const ObservableForm& form) {
  BlockMaxima out = m;
  for (double& v : out.values) v = v == kInfinity ? kInfinity : apply_form(form, v);
  return out;
}

std::vector<double> scheduled_levels(const Regime& regime, const std::vector<std::uint64_t>& ns,
                                     const Parameters& p) {
  const double lo = p.real("tau.min"), hi = p.real("tau.max");
  const std::size_t points = p.count("tau.points");
  if (!(lo > 0.0 && hi > lo) || points < 2) bad("tau grid needs 0 < tau.min < tau.max and 2+ points");
  const auto taus = log_grid(lo, hi, points);
  std::vector<double> levels;
  for (auto n : ns)
    for (double tau : taus) {
      try {
        const double h = threshold_schedule(regime, static_cast<double>(n), tau);
        if (std::isfinite(h) && h > 0.0) levels.push_back(h);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateThreshold) throw;
      }
    }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.empty()) bad("threshold schedule produced no admissible levels");
  return levels;
}

Table neighborhood_table(const NeighborhoodCurve& c, const std::vector<double>& reference) {
  Table t{kNeighborhoodHeader, {}};
  for (std::size_t i = 0; i < c.eps.size(); ++i)
    t.rows.push_back({c.eps[i], c.mu_hat[i], c.stderr[i], reference[i]});
  return t;
}

std::vector<double> power_reference(const NeighborhoodCurve& c, double d, double a) {
  std::vector<double> r;
  for (double e : c.eps) r.push_back(a * std::pow(e, d));
  return r;
}

std::vector<double> double_exp_reference(const NeighborhoodCurve& c, double b, double d,
                                         double q) {
  std::vector<double> r;
  for (double e : c.eps) r.push_back(b * std::exp(-d * std::pow(e, -q)));
  return r;
}

json scaling_json(const ScalingFit& f) {
  return {{"dimension", f.dimension},         {"dimension_stderr", f.dimension_stderr},
          {"content", f.content},             {"residual_band", f.residual_band},
          {"cesaro_periods", f.cesaro_periods}, {"points", f.points}};
}

json nonstandard_json(const NonStandardFit& f) {
  return {{"prefactor", f.prefactor}, {"rate", f.rate},   {"exponent", f.exponent},
          {"rms_residual", f.rms_residual}, {"points", f.points}};
}

std::vector<double> eps_grid(const Parameters& p) {
  const double lo = p.real("eps.min"), hi = p.real("eps.max");
  const std::size_t points = p.count("eps.points");
  if (!(lo > 0.0 && hi > lo) || points < 2) bad("eps grid needs 0 < eps.min < eps.max and 2+ points");
  return log_grid(lo, hi, points);
}

BlockMaximaConfig evt_config(const Parameters& p, const ExperimentConfig& cfg, MapSpec map,
                             IntensitySpec intensity) {
  BlockMaximaConfig bc;
  bc.map = map;
  bc.intensity = intensity;
  bc.block_lengths = p.counts("block_lengths");
  bc.samples = p.count("samples");
  bc.seed = cfg.seed;
  validate(bc);
  return bc;
}

Outcome empty_outcome() {
  Outcome o;
  o.tables["law.csv"] = Table{kLawHeader, {}};
  o.tables["neighborhood.csv"] = Table{kNeighborhoodHeader, {}};
  return o;
}

// ---- scenarios -------------------------------------------------------------

Outcome ladder(const Parameters& p, const ExperimentConfig& cfg, const WorkerPool& pool,
               bool rotation) {
  const MapSpec map = rotation ? MapSpec{Rotation{p.real_extended("rotation.omega")}}
                               : MapSpec{Tent{p.real("tent.p")}};
  BlockMaximaConfig bc = evt_config(p, cfg, map, LadderMode{Linear{}});
  const auto max_level = p.count("ladder.max_level");
  if (max_level < 2 || max_level > static_cast<std::uint64_t>(kTernaryScanDepth))
    bad("ladder.max_level must lie in [2, 52]");
  const Exponential frechet{p.real("form.beta")};
  const Bounded weibull{p.real("form.bound"), p.real("form.gamma")};
  validate(ObservableForm{frechet});
  validate(ObservableForm{weibull});
  std::vector<double> levels;
  for (std::uint64_t m = 1; m <= max_level; ++m) levels.push_back(static_cast<double>(m));
  bc.level_grid = levels;

  const LadderDiscrete regime{1.0 / 3.0};
  const BlockMaxima maxima = block_maxima(bc, pool);
  const EmpiricalLaw law = empirical_law(maxima, levels, Linear{}, regime);

  Outcome out = empty_outcome();
  out.tables["law.csv"] = law_table(law, 1.0);
  json& s = out.summary;
  json checks;
  std::optional<ThetaEstimate> theta;
  s["theta"] = try_theta(law, theta_options(p, cfg.seed), &theta);
  s["theta"]["theory"] = 1.0;
  checks["theta"] = check(theta ? theta->theta : NAN, 1.0, 0.05, false);
  s["sup_deviation"] =
      sup_deviation(law, 1.0, static_cast<double>(p.count("ladder.check_max_level")),
                    p.count("ladder.check_min_n"), rotation ? 0.03 : 0.02, checks, "deviation");

  json scratch;
  s["sup_deviation_all_levels"] =
      sup_deviation(law, 1.0, kInfinity, 0, 1.0, scratch, "all");

  const double a = std::log(1.5);
  const double eta = frechet.beta * a, zeta = weibull.gamma * a;
  const BlockMaxima m2 = transform_maxima(maxima, frechet);
  const BlockMaxima m3 = transform_maxima(maxima, weibull);
  const auto tail = [&](const BlockMaxima& m, const ObservableForm& form, double theory,
                        const std::string& name) {
    try {
      const TailFit f = frechet_weibull_check(empirical_law(m, levels, form, regime), form);
      s[name] = {{"exponent", f.exponent}, {"points", f.points}, {"theory", theory}};
      checks[name] = check(f.exponent, theory, 0.10, true);
    } catch (const Error& e) {
      s[name] = {{"error", std::string(error_code_name(e.code()))}, {"theory", theory}};
      checks[name] = {{"pass", false}};
    }
  };
  tail(m2, frechet, eta, "frechet");
  tail(m3, weibull, zeta, "weibull");
  try {
    const TailFit g = level_set_exponent(m2, levels, frechet);
    s["level_set"] = {{"exponent", g.exponent}, {"points", g.points}, {"theory", eta}};
    checks["level_set"] = check(g.exponent, eta, 0.05, true);
  } catch (const Error& e) {
    s["level_set"] = {{"error", std::string(error_code_name(e.code()))}, {"theory", eta}};
  }
  s["infinite_points"] = maxima.infinite_points;
  s["checks"] = checks;
  return out;
}

struct DistanceEvt {
  std::vector<double> levels;
  BlockMaxima maxima;
};

DistanceEvt distance_evt(BlockMaximaConfig bc, const Regime& regime, const Parameters& p,
                         const WorkerPool& pool) {
  DistanceEvt d;
  d.levels = scheduled_levels(regime, bc.block_lengths, p);
  bc.level_grid = d.levels;
  d.maxima = block_maxima(bc, pool);
  return d;
}

Outcome cantor_dist_rotation(const Parameters& p, const ExperimentConfig& cfg,
                             const WorkerPool& pool) {
  const PowerLaw regime{p.real("regime.dimension"), p.real("regime.content")};
  validate(Regime{regime});
  const auto grid = eps_grid(p);
  const BlockMaximaConfig bc =
      evt_config(p, cfg, Rotation{p.real_extended("rotation.omega")},
                 LogDistanceMode{TernaryCantor{}, Linear{}});

  Outcome out = empty_outcome();
  json& s = out.summary;
  json checks;
  const NeighborhoodCurve curve =
      neighborhood_curve(TernaryCantor{}, LebesgueMeasure{}, grid, ExactMethod{});
  out.tables["neighborhood.csv"] =
      neighborhood_table(curve, power_reference(curve, regime.dimension, regime.content));
  const ScalingFit fit = fit_standard(curve);
  s["fit"] = scaling_json(fit);
  s["theory"] = {{"dimension", kCantorDimension}, {"content", 2.5}};
  checks["dimension"] = check(fit.dimension, kCantorDimension, 0.005, false);
  checks["content"] = check(fit.content, 2.5, 0.05, true);

  const DistanceEvt evt = distance_evt(bc, regime, p, pool);
  const EmpiricalLaw law = empirical_law(evt.maxima, evt.levels, Linear{}, regime);
  out.tables["law.csv"] = law_table(law, 1.0);
  std::optional<ThetaEstimate> theta;
  s["theta"] = try_theta(law, theta_options(p, cfg.seed), &theta);
  s["theta"]["theory"] = 1.0;
  checks["theta"] = check(theta ? theta->theta : NAN, 1.0, 0.05, false);
  s["sup_deviation"] = sup_deviation(law, 1.0, kInfinity, 100, 1.0, checks, "deviation");
  checks.erase("deviation_final");

  // The n = 1 column is the Lebesgue tail of -log d, i.e. the exact
  // neighborhood measure at eps = e^-h.
  const auto one = std::find(law.block_lengths.begin(), law.block_lengths.end(), 1u);
  if (one != law.block_lengths.end()) {
    const auto i = static_cast<std::size_t>(one - law.block_lengths.begin());
    double worst = 0.0;
    for (std::size_t l = 0; l < law.levels.size(); ++l) {
      const double exact = lebesgue_neighborhood_exact(std::exp(-law.levels[l]));
      const double se = std::max(law.stderr_at(l, i), 1.0 / static_cast<double>(law.total));
      worst = std::max(worst, std::abs(1.0 - law.a_hat(l, i) - exact) / se);
    }
    s["tail_bridge_max_z"] = worst;
  }
  s["checks"] = checks;
  return out;
}

Outcome qmark_cantor_content(const Parameters& p, const ExperimentConfig& cfg,
                             const WorkerPool& pool) {
  const PowerLaw regime{p.real("regime.dimension"), p.real("regime.content")};
  validate(Regime{regime});
  const auto grid = eps_grid(p);
  const double tol = p.real("mobius.tol");
  const Mobius mob{tol};
  const BlockMaximaConfig bc =
      evt_config(p, cfg, mob, LogDistanceMode{TernaryCantor{}, Linear{}});
  const double exact_lo = p.real("exact.eps_min"), exact_hi = p.real("exact.eps_max");
  if (!(exact_lo > 0.0 && exact_hi > exact_lo)) bad("exact window needs 0 < min < max");
  const std::uint64_t mc_samples = p.count("mc.samples");
  if (mc_samples == 0) bad("mc.samples must be positive");

  Outcome out = empty_outcome();
  json& s = out.summary;
  json checks;
  const NeighborhoodCurve mc = neighborhood_curve(
      TernaryCantor{}, QmarkMeasure{}, grid,
      MonteCarloMethod{mc_samples, derive_seed(cfg.seed, 0xc0de), tol}, pool);
  out.tables["neighborhood.csv"] =
      neighborhood_table(mc, power_reference(mc, kCantorDimension, 1.0));
  s["theory"] = {{"dimension", kCantorDimension}, {"content", 1.0}};
  try {
    const ScalingFit fit = fit_standard(mc);
    s["fit"] = scaling_json(fit);
    checks["dimension"] = check(fit.dimension, kCantorDimension, 0.01, false);
    checks["content"] = check(fit.content, 1.0, 0.07, true);
  } catch (const Error& e) {
    s["fit"] = {{"error", std::string(error_code_name(e.code()))}, {"message", e.what()}};
    checks["dimension"] = {{"pass", false}};
    checks["content"] = {{"pass", false}};
  }

  const auto exact_grid = log_grid(exact_lo, exact_hi,
                                   static_cast<std::size_t>(40 * std::log10(exact_hi / exact_lo)) + 1);
  const NeighborhoodCurve exact =
      neighborhood_curve(TernaryCantor{}, QmarkMeasure{}, exact_grid, ExactMethod{});
  out.tables["neighborhood_exact.csv"] =
      neighborhood_table(exact, power_reference(exact, kCantorDimension, 1.0));
  try {
    s["fit_exact"] = scaling_json(fit_standard(exact));
  } catch (const Error& e) {
    s["fit_exact"] = {{"error", std::string(error_code_name(e.code()))}};
  }
  // Monte Carlo against the exact curve on the same grid.
  double worst = 0.0;
  for (std::size_t i = 0; i < mc.eps.size(); ++i) {
    const double ref = qmark_cantor_neighborhood(mc.eps[i]).to_double();
    const double se = std::max(mc.stderr[i], 1.0 / static_cast<double>(mc_samples));
    worst = std::max(worst, std::abs(mc.mu_hat[i] - ref) / se);
  }
  s["exact_agreement_max_z"] = worst;

  const DistanceEvt evt = distance_evt(bc, regime, p, pool);
  const EmpiricalLaw law = empirical_law(evt.maxima, evt.levels, Linear{}, regime);
  out.tables["law.csv"] = law_table(law, 1.0);
  s["theta"] = try_theta(law, theta_options(p, cfg.seed));
  s["theta"]["theory"] = 1.0;
  s["checks"] = checks;
  return out;
}

Outcome rare_singleton(const Parameters& p, const ExperimentConfig& cfg,
                       const WorkerPool& pool) {
  const std::uint64_t k = p.count("singleton.k");
  const Singleton target{k};
  validate(TargetSet{target});
  const auto grid = eps_grid(p);
  const BlockMaximaConfig bc =
      evt_config(p, cfg, Mobius{p.real("mobius.tol")}, LogDistanceMode{target, Linear{}});

  Outcome out = empty_outcome();
  json& s = out.summary;
  json checks;
  const NeighborhoodCurve curve = neighborhood_curve(target, QmarkMeasure{}, grid, ExactMethod{});
  const NonStandardFit fit = fit_nonstandard(curve);
  const BallAsymptotic theory = BallAsymptotic::for_center(k);
  out.tables["neighborhood.csv"] = neighborhood_table(
      curve, double_exp_reference(curve, theory.prefactor, theory.rate, 1.0));
  s["fit"] = nonstandard_json(fit);
  s["theory"] = {{"prefactor", theory.prefactor}, {"rate", theory.rate}, {"exponent", 1.0}};
  checks["exponent"] = check(fit.exponent, 1.0, 0.05, true);
  checks["rate"] = check(fit.rate, theory.rate, 0.05, true);
  checks["prefactor"] = check(fit.prefactor, theory.prefactor, 0.15, true);

  json ratios = json::array();
  for (double eps : {1e-3, 1e-4, 1e-5})
    ratios.push_back({{"eps", eps}, {"ratio", std::exp(ball_measure(k, eps).log() -
                                                       theory.log_value(eps))}});
  s["asymptotic_ratio"] = ratios;

  const Regime fitted = DoubleExp{fit.prefactor, fit.rate, fit.exponent};
  const Regime exact = DoubleExp{theory.prefactor, theory.rate, 1.0};
  const bool use_fit = p.text("regime") == "fitted";
  const DistanceEvt evt = distance_evt(bc, use_fit ? fitted : exact, p, pool);
  const EmpiricalLaw law = empirical_law(evt.maxima, evt.levels, Linear{}, use_fit ? fitted : exact);
  out.tables["law.csv"] = law_table(law, 1.0);
  std::optional<ThetaEstimate> theta;
  const ThetaOptions opts = theta_options(p, cfg.seed);
  s["theta"] = try_theta(law, opts, &theta);
  s["theta"]["theory"] = 1.0;
  s["theta"]["regime"] = p.text("regime");
  s["theta_other_regime"] =
      try_theta(empirical_law(evt.maxima, evt.levels, Linear{}, use_fit ? exact : fitted), opts);
  checks["theta"] = check(theta ? theta->theta : NAN, 1.0, 0.05, false);
  s["sup_deviation"] = sup_deviation(law, 1.0, kInfinity, 10, 1.0, checks, "deviation");
  checks.erase("deviation_final");
  s["checks"] = checks;
  return out;
}

Outcome harmonic_closure(const Parameters& p, const ExperimentConfig& cfg,
                         const WorkerPool& pool) {
  const auto grid = eps_grid(p);
  const BlockMaximaConfig bc = evt_config(p, cfg, Mobius{p.real("mobius.tol")},
                                          LogDistanceMode{HarmonicClosure{}, Linear{}});
  const Regime reported =
      DoubleExp{p.real("regime.prefactor"), p.real("regime.rate"), p.real("regime.exponent")};
  validate(reported);

  Outcome out = empty_outcome();
  json& s = out.summary;
  json checks;
  const NeighborhoodCurve curve =
      neighborhood_curve(HarmonicClosure{}, QmarkMeasure{}, grid, ExactMethod{});
  const NonStandardFit free_fit = fit_nonstandard(curve);
  const NonStandardFit fixed_fit = fit_nonstandard(curve, {}, 1.0 / 3.0);
  const SaddlePoint saddle = saddle_point_constants();
  out.tables["neighborhood.csv"] = neighborhood_table(
      curve, double_exp_reference(curve, fixed_fit.prefactor, fixed_fit.rate, 1.0 / 3.0));
  s["fit"] = nonstandard_json(free_fit);
  s["fit_fixed_exponent"] = nonstandard_json(fixed_fit);
  s["saddle"] = {{"rate_theory", saddle.rate_theory},
                 {"prefactor_numeric", saddle.prefactor_numeric},
                 {"reference_eps", saddle.reference_eps},
                 {"spread", saddle.spread}};
  s["reported"] = {{"prefactor", 24.61}, {"rate", 1.26}, {"exponent", 1.0 / 3.0}, {"theta", 0.47}};
  checks["exponent"] = check(free_fit.exponent, 1.0 / 3.0, 0.10, true);
  checks["rate"] = check(free_fit.rate, 1.26, 0.15, true);
  const HarmonicMeasure series = harmonic_series_measure(1e-3);
  s["series_check"] = {{"eps", 1e-3}, {"exact", series.exact}, {"series", series.series},
                       {"ratio", series.series / series.exact}};

  const std::map<std::string, Regime> regimes = {
      {"reported", reported},
      {"fitted", DoubleExp{free_fit.prefactor, free_fit.rate, free_fit.exponent}},
      {"fixed-q", DoubleExp{fixed_fit.prefactor, fixed_fit.rate, 1.0 / 3.0}}};
  const std::string chosen = p.text("regime");
  const Regime& regime = regimes.at(chosen);
  const DistanceEvt evt = distance_evt(bc, regime, p, pool);
  const ThetaOptions opts = theta_options(p, cfg.seed);
  std::optional<ThetaEstimate> theta;
  const EmpiricalLaw law = empirical_law(evt.maxima, evt.levels, Linear{}, regime);
  s["theta"] = try_theta(law, opts, &theta);
  s["theta"]["regime"] = chosen;
  json by_regime;
  for (const auto& [name, r] : regimes)
    by_regime[name] = try_theta(empirical_law(evt.maxima, evt.levels, Linear{}, r), opts);
  s["theta_by_regime"] = by_regime;
  checks["theta"] = check_range(theta ? theta->theta : NAN, 0.42, 0.52);
  out.tables["law.csv"] = law_table(law, theta ? theta->theta : 1.0);
  s["checks"] = checks;
  return out;
}

Outcome minkowski_scan(const Parameters& p, const ExperimentConfig& cfg, const WorkerPool& pool) {
  const std::uint64_t k = p.count("singleton.k");
  validate(TargetSet{Singleton{k}});
  const double per_decade = static_cast<double>(p.count("eps.points_per_decade"));
  if (per_decade < 1.0) bad("eps.points_per_decade must be positive");
  const std::uint64_t mc_samples = p.count("mc.samples");
  if (mc_samples == 0) bad("mc.samples must be positive");
  const auto grid = [&](double lo, double hi) {
    return log_grid(lo, hi, static_cast<std::size_t>(per_decade * std::log10(hi / lo)) + 1);
  };

  Outcome out = empty_outcome();
  json& s = out.summary;
  json checks;

  const auto leb = neighborhood_curve(TernaryCantor{}, LebesgueMeasure{}, grid(1e-8, 1e-2),
                                      ExactMethod{});
  const ScalingFit leb_fit = fit_standard(leb);
  out.tables["neighborhood.csv"] = neighborhood_table(leb, power_reference(leb, kCantorDimension, 2.5));
  s["lebesgue_cantor"] = scaling_json(leb_fit);
  checks["lebesgue_dimension"] = check(leb_fit.dimension, kCantorDimension, 0.005, false);
  checks["lebesgue_content"] = check(leb_fit.content, 2.5, 0.05, true);

  const auto leb_mc = neighborhood_curve(
      TernaryCantor{}, LebesgueMeasure{}, grid(1e-5, 1e-1),
      MonteCarloMethod{mc_samples, derive_seed(cfg.seed, 0x1eb), 1e-12}, pool);
  std::vector<double> leb_exact;
  double worst = 0.0;
  for (std::size_t i = 0; i < leb_mc.eps.size(); ++i) {
    leb_exact.push_back(lebesgue_neighborhood_exact(leb_mc.eps[i]));
    const double se = std::max(leb_mc.stderr[i], 1.0 / static_cast<double>(mc_samples));
    worst = std::max(worst, std::abs(leb_mc.mu_hat[i] - leb_exact.back()) / se);
  }
  out.tables["neighborhood_lebesgue_mc.csv"] = neighborhood_table(leb_mc, leb_exact);
  s["lebesgue_mc_max_z"] = worst;

  const auto qc = neighborhood_curve(TernaryCantor{}, QmarkMeasure{}, grid(1e-8, 1e-2),
                                     ExactMethod{});
  out.tables["neighborhood_qmark_cantor.csv"] =
      neighborhood_table(qc, power_reference(qc, kCantorDimension, 1.0));
  s["qmark_cantor"] = scaling_json(fit_standard(qc));

  const auto qs = neighborhood_curve(Singleton{k}, QmarkMeasure{}, grid(1e-4, 1e-2),
                                     ExactMethod{});
  const BallAsymptotic ball = BallAsymptotic::for_center(k);
  out.tables["neighborhood_qmark_singleton.csv"] =
      neighborhood_table(qs, double_exp_reference(qs, ball.prefactor, ball.rate, 1.0));
  s["qmark_singleton"] = nonstandard_json(fit_nonstandard(qs));
  s["qmark_singleton"]["theory"] = {{"prefactor", ball.prefactor}, {"rate", ball.rate},
                                    {"exponent", 1.0}};

  const auto qh = neighborhood_curve(HarmonicClosure{}, QmarkMeasure{}, grid(1e-6, 1e-1),
                                     ExactMethod{});
  const NonStandardFit hf = fit_nonstandard(qh);
  out.tables["neighborhood_qmark_harmonic.csv"] =
      neighborhood_table(qh, double_exp_reference(qh, hf.prefactor, hf.rate, hf.exponent));
  s["qmark_harmonic"] = nonstandard_json(hf);
  checks["harmonic_exponent"] = check(hf.exponent, 1.0 / 3.0, 0.10, true);
  s["checks"] = checks;
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw Error(ErrorCode::kIo, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

}  // namespace

const std::vector<ScenarioInfo>& scenarios() {
  static const std::vector<ScenarioInfo> list = {
      {"ladder-tent", "Cantor ladder observable on the asymmetric tent map (mixing case)",
       "30 s"},
      {"ladder-rotation", "Cantor ladder observable on the golden rotation (ergodic, non-mixing)",
       "35 s"},
      {"cantor-dist-rotation",
       "log-distance to the Cantor set, Lebesgue measure, Minkowski dimension and content",
       "2 min"},
      {"qmark-cantor-content",
       "Cantor set under the question-mark measure, generalized Minkowski content", "9 min"},
      {"rare-singleton", "Mobius map, ball around 1/k, non-standard double-exponential scaling",
       "4 min"},
      {"harmonic-closure", "Mobius map, harmonic closure {0} and 1/k, saddle-point exponent 1/3",
       "4 min"},
      {"minkowski-scan", "neighborhood measures of every target and measure pair", "10 s"},
  };
  return list;
}

const std::vector<ParamSpec>& parameters(std::string_view scenario) {
  const auto it = tables().find(scenario);
  if (it == tables().end()) bad("unknown scenario '" + std::string(scenario) + "'");
  return it->second;
}

Overrides parse_config(std::string_view text) {
  Overrides out;
  std::size_t lineno = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      bad("config line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) bad("config line " + std::to_string(lineno) + " has an empty key");
    if (const auto q = qualified(key)) {
      const ParamSpec* spec = find_param(q->first, q->second);
      if (!spec) bad("unknown parameter '" + q->second + "' for scenario " + q->first);
      check_value(*spec, value);
    }
    out[key] = value;
  }
  return out;
}

Overrides read_config_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void apply_override(Overrides& into, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) bad("override '" + std::string(assignment) + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) bad("override with an empty key");
  into[key] = trim(assignment.substr(eq + 1));
}

Parameters::Parameters(std::string scenario, std::map<std::string, std::string> values)
    : scenario_(std::move(scenario)), values_(std::move(values)) {}

namespace {
const std::string& lookup(const std::map<std::string, std::string>& values,
                          const std::string& key) {
  const auto it = values.find(key);
  if (it == values.end()) bad("no parameter " + key);
  return it->second;
}
}  // namespace

std::uint64_t Parameters::count(const std::string& key) const {
  const auto v = parse_count(lookup(values_, key));
  if (!v) bad("parameter " + key + " is not a count");
  return *v;
}

double Parameters::real(const std::string& key) const {
  return static_cast<double>(real_extended(key));
}

long double Parameters::real_extended(const std::string& key) const {
  const auto v = parse_real(lookup(values_, key));
  if (!v) bad("parameter " + key + " is not a real number");
  return *v;
}

std::vector<std::uint64_t> Parameters::counts(const std::string& key) const {
  const auto v = parse_count_list(lookup(values_, key));
  if (!v) bad("parameter " + key + " is not a list of counts");
  return *v;
}

const std::string& Parameters::text(const std::string& key) const { return lookup(values_, key); }

Parameters resolve(const ExperimentConfig& config) {
  const auto& table = parameters(config.scenario);
  std::map<std::string, std::string> values;
  for (const auto& p : table) values[p.key] = p.default_value;
  // Unqualified keys first, then keys qualified with this scenario.
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& [raw, value] : config.parameters) {
      const auto q = qualified(raw);
      if (kReserved.count(q ? q->second : raw)) continue;
      if ((pass == 0) != !q.has_value()) continue;
      if (q && q->first != config.scenario) continue;
      const std::string key = q ? q->second : raw;
      const ParamSpec* spec = find_param(config.scenario, key);
      if (!spec) bad("unknown parameter '" + key + "' for scenario " + config.scenario);
      check_value(*spec, value);
      values[key] = value;
    }
  if (config.workers == 0) bad("workers must be positive");
  return Parameters(config.scenario, std::move(values));
}

Outcome compute(const ExperimentConfig& config) {
  const Parameters p = resolve(config);
  const WorkerPool pool(config.workers);
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  const std::string& name = config.scenario;
  if (name == "ladder-tent")
    out = ladder(p, config, pool, false);
  else if (name == "ladder-rotation")
    out = ladder(p, config, pool, true);
  else if (name == "cantor-dist-rotation")
    out = cantor_dist_rotation(p, config, pool);
  else if (name == "qmark-cantor-content")
    out = qmark_cantor_content(p, config, pool);
  else if (name == "rare-singleton")
    out = rare_singleton(p, config, pool);
  else if (name == "harmonic-closure")
    out = harmonic_closure(p, config, pool);
  else
    out = minkowski_scan(p, config, pool);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json& s = out.summary;
  s["scenario"] = name;
  s["seed"] = config.seed;
  s["workers"] = config.workers;
  s["wall_clock_seconds"] = seconds;
  s["parameters"] = p.values();
  bool pass = true;
  const json checks = s.value("checks", json::object());
  for (const auto& c : checks) pass = pass && c.value("pass", false);
  s["pass"] = pass;
  std::vector<std::string> files;
  for (const auto& [file, table] : out.tables) files.push_back(file);
  s["files"] = files;
  return out;
}

std::string render_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      const double v = row[c];
      if (table.header[c] == "n")
        std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
      else
        std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

json run(const ExperimentConfig& config) {
  resolve(config);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + config.output_dir.string());
  const Outcome out = compute(config);
  for (const auto& [file, table] : out.tables)
    write_atomic(config.output_dir / file, render_csv(table));
  write_atomic(config.output_dir / "summary.json", out.summary.dump(2) + "\n");
  return out.summary;
}

std::string list_scenarios() {
  std::string out;
  for (const auto& info : scenarios()) {
    out += "# " + info.name + ": " + info.anchor + " (about " + info.runtime + " on one core)\n";
    for (const auto& p : parameters(info.name)) {
      out += info.name + "." + p.key + " = " + p.default_value;
      if (p.kind == ParamKind::kChoice) {
        out += "  # one of";
        for (const auto& c : p.choices) out += " " + c;
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

}  // namespace fractal_evt::experiment
