#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergostab/cli.hpp"
#include "ergostab/config.hpp"
#include "ergostab/curve.hpp"
#include "ergostab/errors.hpp"
#include "ergostab/report.hpp"
#include "ergostab/scenarios.hpp"

using namespace ergostab;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ergostab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

ExperimentConfig small_standard_map() {
  ExperimentConfig c = default_config("standard_map_counterexample");
  auto& p = std::get<StandardMapParams>(c.params);
  p.k_values = {0.0, 0.5, 1.5};
  p.grid = 16;
  p.ensemble = 8;
  p.horizon = 2000;
  return c;
}

DissipativeParams small_transition() {
  DissipativeParams t;
  t.k_start = 4.0;
  t.k_stop = 6.0;
  t.k_steps = 3;
  t.ensemble = 8;
  t.summary_first_horizon = 100;
  t.summary_horizon_count = 3;
  t.decay_first_horizon = 100;
  t.decay_horizon_count = 3;
  return t;
}

std::string csv_of(const Report& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("default configs round-trip byte-identically") {
  for (const std::string& name : scenario_names()) {
    const ExperimentConfig c = default_config(name);
    const std::string text = serialize_config(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
  }
}

TEST_CASE("changing a parameter changes the hash") {
  ExperimentConfig a = small_standard_map();
  ExperimentConfig b = a;
  std::get<StandardMapParams>(b.params).horizon += 1;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("missing fields keep defaults and the fallback scenario applies") {
  const ExperimentConfig c = parse_config(R"({"seed": 9})", "inline", "standard_map_counterexample");
  CHECK(c.scenario == "standard_map_counterexample");
  CHECK(c.seed == 9);
  CHECK(std::get<StandardMapParams>(c.params).grid == 64);
}

TEST_CASE("config errors carry their location") {
  try {
    parse_config("{\n  \"seed\": 1,\n  oops\n}", "bad.json", "standard_map_counterexample");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.json:3") != std::string::npos);
  }
  try {
    parse_config(R"({"scenario": "standard_map_counterexample", "parameters": {"grid": "wide"}})");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"scenario": "standard_map_counterexample", "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "nope"})"), ConfigError);
  CHECK_THROWS_AS(default_config("nope"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("validation rejects out-of-range values") {
  ExperimentConfig c = small_standard_map();
  std::get<StandardMapParams>(c.params).grid = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("catalog lists the five scenarios") {
  const auto& cat = scenario_catalog();
  REQUIRE(cat.size() == 5);
  REQUIRE(scenario_names().size() == 5);
  for (std::size_t i = 0; i < cat.size(); ++i) {
    CHECK(cat[i].name == scenario_names()[i]);
    CHECK_FALSE(cat[i].summary.empty());
    CHECK_FALSE(cat[i].claim.empty());
  }
}

TEST_CASE("list prints every scenario") {
  const CliResult r = run_cli({"list"});
  CHECK(r.code == kExitOk);
  for (const std::string& name : scenario_names()) CHECK(r.out.find(name) != std::string::npos);
  const CliResult j = run_cli({"--format", "json", "list"});
  CHECK(j.code == kExitOk);
  CHECK(Json::parse(j.out).size() == 5);
}

TEST_CASE("a missing config exits with the config code and writes nothing") {
  const fs::path dir = scratch("missing");
  const CliResult r =
      run_cli({"--config", "/nonexistent/x.json", "--out", dir.string(), "experiment", "standard_map_counterexample"});
  CHECK(r.code == kExitConfig);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("unknown scenarios and bad options exit with the config code") {
  CHECK(run_cli({"experiment", "no_such_scenario"}).code == kExitConfig);
  CHECK(run_cli({"--threads", "0", "list"}).code == kExitConfig);
  CHECK(run_cli({"simulate", "--map", "warp"}).code == kExitConfig);
  CHECK(run_cli({}).code == kExitConfig);
  CHECK(run_cli({"--help"}).code == kExitOk);
}

TEST_CASE("the installed binary reports exit codes") {
  const std::string cli = ERGOSTAB_CLI_PATH;
  CHECK(std::system((cli + " list > /dev/null").c_str()) == 0);
  const int status = std::system((cli + " experiment no_such_scenario 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(status) == kExitConfig);
}

TEST_CASE("experiment output is identical across thread counts") {
  const fs::path dir = scratch("threads");
  write_file(dir / "small.json", serialize_config(small_standard_map()));
  std::string first;
  for (const char* threads : {"1", "3"}) {
    const fs::path out = dir / threads;
    const CliResult r = run_cli({"--config", (dir / "small.json").string(), "--threads", threads, "--out",
                                 out.string(), "experiment", "standard_map_counterexample"});
    CHECK((r.code == kExitOk || r.code == kExitAssertion));
    const fs::path csv = out / "standard_map_counterexample.csv";
    REQUIRE(fs::exists(csv));
    CHECK(fs::exists(out / "standard_map_counterexample.plot"));
    CHECK(fs::exists(out / "standard_map_counterexample.config.json"));
    const std::string text = slurp(csv);
    if (first.empty()) {
      first = text;
    } else {
      CHECK(text == first);
    }
  }
  CHECK(first.rfind("scenario,epsilon_index,epsilon_desc,horizon,value,stderr,verdict\n", 0) == 0);
  CHECK(parse_config(slurp(dir / "1" / "standard_map_counterexample.config.json")).seed == 1);
}

TEST_CASE("seed override changes sampled results") {
  ExperimentConfig a = small_standard_map();
  ExperimentConfig b = a;
  b.seed = 2;
  CHECK(csv_of(run_experiment(a)) == csv_of(run_experiment(a)));
  CHECK(csv_of(run_experiment(a)) != csv_of(run_experiment(b)));
}

TEST_CASE("CSV rows follow the schema") {
  const Report r = run_experiment(small_standard_map());
  std::istringstream in(csv_of(r));
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    CHECK(line.rfind("standard_map_counterexample,", 0) == 0);
  }
  CHECK(rows == r.rows.size());
}

TEST_CASE("JSON output carries the verdicts and rows") {
  const Report r = run_experiment(small_standard_map());
  std::ostringstream os;
  write_json(os, r);
  const Json j = Json::parse(os.str());
  CHECK(j.at("scenario") == "standard_map_counterexample");
  CHECK(j.at("rows").size() == r.rows.size());
  CHECK(j.at("verdicts").size() == r.verdicts.size());
  CHECK(j.at("config_hash") == config_hash(r.config));
}

TEST_CASE("unmodulated skew product reproduces the dissipative run") {
  ExperimentConfig diss = default_config("dissipative_transition");
  diss.params = small_transition();
  ExperimentConfig skew = default_config("skew_quasiperiodic");
  auto& sp = std::get<SkewParams>(skew.params);
  sp.transition = small_transition();
  sp.modulation = {0.0, 0.0};
  sp.ulam_samples = 16;
  const Report a = run_experiment(diss);
  const Report b = run_experiment(skew);
  std::size_t compared = 0;
  for (const CurveRow& row : a.rows.rows()) {
    if (row.epsilon_desc.rfind("occupancy@", 0) != 0) continue;
    const auto it = std::find_if(b.rows.rows().begin(), b.rows.rows().end(), [&](const CurveRow& o) {
      return o.epsilon_desc == row.epsilon_desc && o.horizon == row.horizon;
    });
    REQUIRE(it != b.rows.rows().end());
    CHECK(it->value == row.value);
    ++compared;
  }
  CHECK(compared == 9);
}

TEST_CASE("simulate writes a CSV for each estimator") {
  for (const char* est : {"itea", "coverage"}) {
    const CliResult r = run_cli({"--seed", "3", "simulate", "--map", "rotation", "--estimator", est, "--ensemble",
                                 "4", "--horizon", "500", "--grid", "8"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.rfind("scenario,epsilon_index", 0) == 0);
  }
  const CliResult occ = run_cli({"simulate", "--map", "cylinder", "--k", "8", "--estimator", "occupancy", "--source",
                                 "-0.05", "0.05", "0", "1", "--detector", "-3.14", "3.14", "0", "1", "--ensemble",
                                 "4", "--horizon", "6400"});
  CHECK(occ.code == kExitOk);
  CHECK(occ.out.find("occupancy") != std::string::npos);
}

TEST_CASE("koopman subcommand dumps the operator and projector") {
  const fs::path dir = scratch("koopman");
  const CliResult r = run_cli({"--out", dir.string(), "koopman", "--map", "rotation", "--basis", "fourier",
                               "--numerator", "3", "--denominator", "5", "--cutoff", "6"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("idempotency") != std::string::npos);
  const std::string proj = slurp(dir / "koopman_projector.txt");
  CHECK(proj.rfind("# basis=fourier(cutoff=6)", 0) == 0);
  // five kept modes (m, 0) with 5 | m, |m| <= 6: m = -5, 0, 5
  CHECK(std::count(proj.begin(), proj.end(), '\n') == 2 + 3);
}

TEST_CASE("shipped configs are the canonical defaults") {
  for (const std::string& name : scenario_names()) {
    const fs::path path = fs::path(ERGOSTAB_SOURCE_DIR) / "configs" / (name + ".json");
    REQUIRE(fs::exists(path));
    CHECK(slurp(path) == serialize_config(default_config(name)));
    CHECK(load_config(path.string()).scenario == name);
  }
}
