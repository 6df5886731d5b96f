#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fractal_evt::experiment {

struct ScenarioInfo {
  std::string name;
  std::string anchor;   // the experiment it reproduces
  std::string runtime;  // rough single-core estimate at default budgets
};

/// The seven named scenarios, in a fixed order.
const std::vector<ScenarioInfo>& scenarios();

enum class ParamKind { kCount, kReal, kCountList, kChoice };

struct ParamSpec {
  std::string key;
  ParamKind kind;
  std::string default_value;
  std::vector<std::string> choices;  // kChoice only
};

/// Default parameter table; throws kInvalidArgument for an unknown scenario.
const std::vector<ParamSpec>& parameters(std::string_view scenario);

/// Raw `key = value` pairs. Keys may be qualified with a scenario name
/// ("ladder-tent.samples"); `seed`, `workers` and `out` are reserved.
using Overrides = std::map<std::string, std::string>;

/// Parses flat key = value text ('#' starts a comment). Qualified keys are
/// checked against their scenario's table here; the rest when resolved.
Overrides parse_config(std::string_view text);
Overrides read_config_file(const std::filesystem::path& path);

/// Parses one `key=value` command-line override into `into`.
void apply_override(Overrides& into, std::string_view assignment);

struct ExperimentConfig {
  std::string scenario;
  Overrides parameters;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::filesystem::path output_dir = ".";
};

/// Scenario parameters after defaults and overrides, with typed access.
class Parameters {
 public:
  Parameters() = default;
  Parameters(std::string scenario, std::map<std::string, std::string> values);

  const std::string& scenario() const noexcept { return scenario_; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::uint64_t count(const std::string& key) const;
  double real(const std::string& key) const;
  long double real_extended(const std::string& key) const;
  std::vector<std::uint64_t> counts(const std::string& key) const;
  const std::string& text(const std::string& key) const;

 private:
  std::string scenario_;
  std::map<std::string, std::string> values_;
};

/// Merges defaults with the overrides that apply to config.scenario and
/// type-checks every value. Unknown keys raise kInvalidArgument.
Parameters resolve(const ExperimentConfig& config);

/// One CSV table: fixed header plus rows of numbers.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline const std::vector<std::string> kLawHeader = {"level",  "n",         "tau",
                                                    "a_hat",  "stderr",    "reference",
                                                    "deviation"};
inline const std::vector<std::string> kNeighborhoodHeader = {"eps", "mu_hat", "stderr",
                                                             "reference"};

/// In-memory result of a scenario. `tables` maps file names to contents;
/// law.csv and neighborhood.csv are always present.
struct Outcome {
  std::map<std::string, Table> tables;
  nlohmann::json summary;
};

/// Runs the scenario without touching the file system.
Outcome compute(const ExperimentConfig& config);

/// %.17g rendering of a table, with integral columns printed as integers.
std::string render_csv(const Table& table);

/// compute() plus the artifact files. Each file is written to a temporary
/// name and renamed, so a failure never leaves a partial file behind.
/// Returns the summary.
nlohmann::json run(const ExperimentConfig& config);

/// Machine-readable listing: one `scenario.key = value` line per parameter,
/// with the anchor and runtime as comments. Round-trips through parse_config.
std::string list_scenarios();

}  // namespace fractal_evt::experiment
