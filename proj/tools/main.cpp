#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fractal_evt/error.hpp"
#include "fractal_evt/experiment.hpp"
#include "json.hpp"

namespace {

namespace ex = fractal_evt::experiment;

int fail(const std::string& code, const std::string& message) {
  nlohmann::json record = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << record.dump() << '\n';
  return 2;
}

unsigned workers_from_env() {
  const char* env = std::getenv("FRACTAL_EVT_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0)
    throw fractal_evt::Error(fractal_evt::ErrorCode::kInvalidArgument,
                             "FRACTAL_EVT_WORKERS must be a positive integer");
  return static_cast<unsigned>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme value laws for observables with fractal structure"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a named scenario");
  std::string scenario, out_dir, config_file;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::vector<std::string> sets;
  run->add_option("scenario", scenario, "scenario name (see `list`)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "64-bit seed");
  auto* workers_opt = run->add_option("--workers", workers, "worker threads")
                          ->check(CLI::PositiveNumber);
  auto* out_opt = run->add_option("--out", out_dir, "output directory");
  run->add_option("--config", config_file, "key = value parameter file");
  run->add_option("--set", sets, "parameter override key=value")->allow_extra_args(false);

  app.add_subcommand("list", "list scenarios and their default parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what());
  }

  try {
    if (app.got_subcommand("list")) {
      std::cout << ex::list_scenarios();
      return 0;
    }
    ex::ExperimentConfig cfg;
    cfg.scenario = scenario;
    if (!config_file.empty()) cfg.parameters = ex::read_config_file(config_file);
    // Reserved config keys, overridden by flags.
    const auto reserved = [&](const std::string& key) -> const std::string* {
      const auto it = cfg.parameters.find(key);
      return it == cfg.parameters.end() ? nullptr : &it->second;
    };
    if (const auto* v = reserved("seed")) cfg.seed = std::stoull(*v);
    if (const auto* v = reserved("workers")) cfg.workers = static_cast<unsigned>(std::stoul(*v));
    else cfg.workers = workers_from_env();
    if (const auto* v = reserved("out")) cfg.output_dir = *v;
    for (const auto& s : sets) ex::apply_override(cfg.parameters, s);
    if (*seed_opt) cfg.seed = seed;
    if (*workers_opt) cfg.workers = workers;
    if (*out_opt) cfg.output_dir = out_dir;

    const auto summary = ex::run(cfg);
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const fractal_evt::Error& e) {
    return fail(std::string(fractal_evt::error_code_name(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail("invalid_argument", e.what());
  }
}
