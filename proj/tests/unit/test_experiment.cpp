#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fractal_evt/error.hpp"
#include "fractal_evt/experiment.hpp"

using namespace fractal_evt;
namespace ex = fractal_evt::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fractal_evt_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ex::ExperimentConfig small_ladder(unsigned workers, const fs::path& out) {
  ex::ExperimentConfig cfg;
  cfg.scenario = "ladder-tent";
  cfg.seed = 7;
  cfg.workers = workers;
  cfg.output_dir = out;
  cfg.parameters = {{"samples", "3000"}, {"block_lengths", "1,10,100,1000"},
                    {"theta.bootstrap", "20"}};
  return cfg;
}

}  // namespace

TEST_CASE("seven scenarios, each with a complete default table") {
  const auto& list = ex::scenarios();
  CHECK(list.size() == 7);
  for (const auto& s : list) {
    CHECK_FALSE(s.anchor.empty());
    CHECK_FALSE(ex::parameters(s.name).empty());
    ex::ExperimentConfig cfg;
    cfg.scenario = s.name;
    CHECK_NOTHROW(ex::resolve(cfg));
  }
  CHECK_THROWS_AS(ex::parameters("nope"), Error);
}

TEST_CASE("listing round-trips through the config parser") {
  const std::string text = ex::list_scenarios();
  const ex::Overrides parsed = ex::parse_config(text);
  std::size_t expected = 0;
  for (const auto& s : ex::scenarios()) {
    expected += ex::parameters(s.name).size();
    CHECK(text.find("# " + s.name + ": " + s.anchor) != std::string::npos);
  }
  CHECK(parsed.size() == expected);
  // Feeding the whole listing back as a config keeps every default.
  ex::ExperimentConfig cfg;
  cfg.scenario = "harmonic-closure";
  cfg.parameters = parsed;
  const ex::Parameters p = ex::resolve(cfg);
  for (const auto& spec : ex::parameters("harmonic-closure"))
    CHECK(p.text(spec.key) == spec.default_value);
}

TEST_CASE("overrides are validated before any computation") {
  ex::ExperimentConfig cfg;
  cfg.scenario = "ladder-tent";
  cfg.parameters = {{"samples", "1e4"}};
  CHECK(ex::resolve(cfg).count("samples") == 10000);
  cfg.parameters = {{"samples", "many"}};
  CHECK_THROWS_AS(ex::resolve(cfg), Error);
  cfg.parameters = {{"bogus", "1"}};
  CHECK_THROWS_AS(ex::resolve(cfg), Error);
  cfg.parameters = {{"block_lengths", "1,x"}};
  CHECK_THROWS_AS(ex::resolve(cfg), Error);
  // Keys qualified for another scenario are ignored; for this one they win.
  cfg.parameters = {{"harmonic-closure.regime", "fitted"},
                    {"ladder-tent.samples", "500"},
                    {"samples", "900"}};
  CHECK(ex::resolve(cfg).count("samples") == 500);
  cfg.scenario = "harmonic-closure";
  cfg.parameters = {{"regime", "sideways"}};
  CHECK_THROWS_AS(ex::resolve(cfg), Error);
  CHECK_THROWS_AS(ex::parse_config("rare-singleton.nothing = 1\n"), Error);
  CHECK_THROWS_AS(ex::parse_config("just words\n"), Error);
  const auto parsed = ex::parse_config("# comment\nsamples = 12  # trailing\n\nseed=3\n");
  CHECK(parsed.at("samples") == "12");
  CHECK(parsed.at("seed") == "3");
  ex::Overrides o;
  ex::apply_override(o, "tent.p=0.4");
  CHECK(o.at("tent.p") == "0.4");
  CHECK_THROWS_AS(ex::apply_override(o, "novalue"), Error);
}

TEST_CASE("invalid map parameters fail before simulation") {
  ex::ExperimentConfig cfg = small_ladder(1, scratch_dir("invalid"));
  cfg.parameters["tent.p"] = "1.5";
  CHECK_THROWS_AS(ex::compute(cfg), Error);
  cfg.parameters["tent.p"] = "0.45";
  cfg.parameters["block_lengths"] = "10,5";
  CHECK_THROWS_AS(ex::compute(cfg), Error);
}

TEST_CASE("CSV headers are fixed") {
  const ex::Table law{ex::kLawHeader, {{3, 100, 0.5, 0.6, 0.01, 0.606, 0.006}}};
  const std::string csv = ex::render_csv(law);
  CHECK(csv.rfind("level,n,tau,a_hat,stderr,reference,deviation\n", 0) == 0);
  CHECK(csv.find("\n3,100,0.5,0.59999999999999998,") != std::string::npos);
  CHECK(ex::render_csv(ex::Table{ex::kNeighborhoodHeader, {}}) == "eps,mu_hat,stderr,reference\n");
}

TEST_CASE("runs are byte-identical across worker counts") {
  const fs::path a = scratch_dir("w1"), b = scratch_dir("w3");
  const auto sa = ex::run(small_ladder(1, a));
  const auto sb = ex::run(small_ladder(3, b));
  for (const char* f : {"law.csv", "neighborhood.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(sa["theta"]["value"] == sb["theta"]["value"]);
  CHECK(fs::exists(a / "summary.json"));
  for (const auto& entry : fs::directory_iterator(a))
    CHECK(entry.path().extension() != ".tmp");
  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["scenario"] == "ladder-tent");
  CHECK(summary["seed"] == 7);
  CHECK(summary.contains("wall_clock_seconds"));
  CHECK(summary["checks"].contains("theta"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("unwritable output reports an I/O error and leaves nothing behind") {
  const fs::path dir = scratch_dir("blocked");
  {
    std::ofstream f(dir.string());  // a file where the directory should be
  }
  try {
    ex::run(small_ladder(1, dir));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  CHECK(fs::is_regular_file(dir));
  fs::remove(dir);
}

TEST_CASE("curve scenarios write neighborhood tables") {
  ex::ExperimentConfig cfg;
  cfg.scenario = "minkowski-scan";
  cfg.parameters = {{"mc.samples", "20000"}, {"eps.points_per_decade", "10"}};
  const ex::Outcome out = ex::compute(cfg);
  CHECK(out.tables.at("law.csv").rows.empty());
  CHECK_FALSE(out.tables.at("neighborhood.csv").rows.empty());
  CHECK(out.tables.count("neighborhood_qmark_harmonic.csv") == 1);
  for (const auto& [name, t] : out.tables)
    CHECK(t.header == (name == "law.csv" ? ex::kLawHeader : ex::kNeighborhoodHeader));
  CHECK(out.summary["checks"]["lebesgue_dimension"]["pass"] == true);
}
