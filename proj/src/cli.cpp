#include "ergostab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "ergostab/averaging.hpp"
#include "ergostab/config.hpp"
#include "ergostab/errors.hpp"
#include "ergostab/koopman.hpp"
#include "ergostab/report.hpp"
#include "ergostab/scenarios.hpp"

namespace ergostab {

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string format = "csv";
};

struct MapOptions {
  std::string map = "rotation";
  double alpha = kGoldenMean;
  double beta = kSilverFraction;
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  double k = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--map", map, "rotation, standard or cylinder")
        ->check(CLI::IsMember({"rotation", "standard", "cylinder"}))
        ->capture_default_str();
    cmd->add_option("--alpha", alpha, "rotation number in p")->capture_default_str();
    cmd->add_option("--beta", beta, "rotation number in q")->capture_default_str();
    cmd->add_option("--numerator", numerator, "exact rational alpha = numerator/denominator");
    cmd->add_option("--denominator", denominator, "exact rational alpha = numerator/denominator");
    cmd->add_option("--k", k, "standard map kick strength K")->capture_default_str();
  }

  bool rational_alpha() const { return denominator != 0; }

  MapDef build() const {
    if (map == "standard") return MapDef(StandardMapTorus{k});
    if (map == "cylinder") return MapDef(StandardMapCylinder{k});
    const double a = rational_alpha() ? rational(numerator, denominator).value() : alpha;
    return MapDef(TorusRotation{a, beta});
  }
};

struct SimulateOptions {
  MapOptions map;
  std::string estimator = "itea";
  std::vector<double> source{0.0, 0.2, 0.0, 0.2};
  std::vector<double> detector{0.5, 0.75, 0.5, 0.75};
  std::size_t ensemble = 64;
  std::uint64_t horizon = 10000;
  std::size_t grid = 64;
  std::string sampler = "random";
};

struct KoopmanOptions {
  MapOptions map;
  std::string basis = "fourier";
  int cutoff = 16;
  std::size_t grid = 32;
  std::size_t samples = 400;
  double tolerance = 1e-6;
};

Region box_of(const PhaseSpace& space, const std::vector<double>& v, const std::string& label) {
  return Region::box(space, {Interval{v[0], v[1]}, Interval{v[2], v[3]}}, label);
}

OutputFormat format_of(const std::string& s) { return s == "json" ? OutputFormat::json : OutputFormat::csv; }

int run_list(const GlobalOptions& g, std::ostream& out) {
  if (format_of(g.format) == OutputFormat::json) {
    Json j = Json::array();
    for (const ScenarioInfo& s : scenario_catalog()) {
      j.push_back(Json{{"name", s.name}, {"summary", s.summary}, {"claim", s.claim}});
    }
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  for (const ScenarioInfo& s : scenario_catalog()) {
    out << s.name << "\n  " << s.summary << "\n  claim: " << s.claim << "\n";
  }
  return kExitOk;
}

int run_experiment_command(const GlobalOptions& g, const std::string& name, std::ostream& out) {
  ExperimentConfig config = g.config.empty() ? default_config(name) : load_config(g.config, name);
  if (g.seed) config.seed = *g.seed;
  if (g.out) config.output_dir = *g.out;
  validate(config);
  const Report report = run_experiment(config, Parallelism{g.threads});
  write_outputs(report, config.output_dir, format_of(g.format));
  write_summary(out, report);
  return report.passed() ? kExitOk : kExitAssertion;
}

int run_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out) {
  const MapDef map = o.map.build();
  const PhaseSpace& space = map.space();
  const Sampler sampler = o.sampler == "lattice" ? Sampler::lattice : Sampler::pseudo_random;
  const EnsembleSpec source{box_of(space, o.source, "source"), o.ensemble, sampler, g.seed.value_or(1)};

  Report report;
  report.scenario = "simulate";
  report.rows = ContinuityCurve("simulate");
  const std::string at = "@" + map.describe();
  if (o.estimator == "itea") {
    const AverageResult r = visit_fraction(map, source, box_of(space, o.detector, "detector"), o.horizon,
                                           Parallelism{g.threads});
    report.rows.add(CurveRow{0, "itea" + at, o.horizon, r.real(), r.standard_error, ""});
  } else if (o.estimator == "coverage") {
    const auto partition = GridPartition::uniform(space, {o.grid, o.grid});
    const CoverageResult r = coverage(map, source, partition, o.horizon, Parallelism{g.threads});
    report.rows.add(CurveRow{0, "coverage" + at, o.horizon, r.fraction, 0.0, ""});
  } else {
    const Region trap = box_of(space, o.detector, "trap");
    const auto horizons = geometric_horizons(std::max<std::uint64_t>(1, o.horizon / 64), 7);
    report.rows.append(occupancy_decay(map, source, trap, horizons, Parallelism{g.threads}, "occupancy" + at));
  }

  if (format_of(g.format) == OutputFormat::json) {
    Json rows = Json::array();
    for (const CurveRow& r : report.rows.rows()) {
      rows.push_back(Json{{"epsilon_desc", r.epsilon_desc},
                          {"horizon", r.horizon},
                          {"value", r.value},
                          {"stderr", r.standard_error}});
    }
    out << Json{{"scenario", "simulate"}, {"rows", rows}}.dump(2) << '\n';
  } else {
    write_csv(out, report);
  }
  if (g.out) {
    std::filesystem::create_directories(*g.out);
    std::ofstream file(std::filesystem::path(*g.out) / "simulate.csv");
    write_csv(file, report);
  }
  return kExitOk;
}

int run_koopman(const GlobalOptions& g, const KoopmanOptions& o, std::ostream& out) {
  const MapDef map = o.map.build();
  KoopmanOperator u;
  InvariantProjector p;
  if (o.basis == "fourier") {
    if (o.map.map != "rotation") throw ConfigError("--basis", "the Fourier basis needs --map rotation");
    if (o.map.rational_alpha()) {
      const RationalApproximant a = rational(o.map.numerator, o.map.denominator);
      u = fourier_koopman_rotation(RotationNumber(a), o.map.beta, o.cutoff);
      p = fourier_projector_rotation(a, o.map.beta, o.cutoff);
    } else {
      u = fourier_koopman_rotation(o.map.alpha, o.map.beta, o.cutoff);
      p = fourier_projector_rotation(Irrational{o.map.alpha}, o.map.beta, o.cutoff);
    }
  } else {
    const auto partition = GridPartition::uniform(map.space(), {o.grid, o.grid});
    u = ulam_matrix(map, partition, o.samples, g.seed.value_or(1), Parallelism{g.threads});
    CesaroOptions opts;
    opts.tolerance = o.tolerance;
    p = cesaro_projector(u, opts);
  }

  const std::filesystem::path dir = g.out.value_or("out");
  std::filesystem::create_directories(dir);
  std::ofstream uf(dir / "koopman_operator.txt");
  write_dump(uf, u.basis, u.matrix);
  std::ofstream pf(dir / "koopman_projector.txt");
  write_dump(pf, p.basis, p.matrix);
  if (!uf || !pf) throw Error("cannot write operator dumps to " + dir.string());

  out << "basis " << describe_basis(u.basis) << " dimension " << u.dimension() << "\n";
  out << "map " << map.describe() << "\n";
  out << "projector iterations " << p.iterations << (p.converged ? " converged" : " not converged") << "\n";
  out << "idempotency_residual " << format_double(idempotency_residual(p)) << "\n";
  out << "invariance_residual " << format_double(invariance_residual(p, u)) << "\n";
  out << "trace " << format_double(p.matrix.to_dense().trace().real()) << "\n";
  out << "wrote " << (dir / "koopman_operator.txt").string() << " and " << (dir / "koopman_projector.txt").string()
      << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time and ensemble averages of measure-preserving maps under perturbation", "ergostab"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--seed", g.seed, "seed overriding the config");
  app.add_option("--out", g.out, "output directory overriding the config");
  app.add_option("--threads", g.threads, "worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  CLI::App* list = app.add_subcommand("list", "scenario catalog");
  list->fallthrough();

  std::string name;
  CLI::App* experiment = app.add_subcommand("experiment", "run a named scenario");
  experiment->fallthrough();
  experiment->add_option("name", name, "scenario name")->required();

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "single estimator run");
  simulate->fallthrough();
  sim.map.attach(simulate);
  simulate->add_option("--estimator", sim.estimator, "itea, coverage or occupancy")
      ->check(CLI::IsMember({"itea", "coverage", "occupancy"}))
      ->capture_default_str();
  simulate->add_option("--source", sim.source, "source box p_lo p_hi q_lo q_hi")->expected(4);
  simulate->add_option("--detector", sim.detector, "detector (or trap) box p_lo p_hi q_lo q_hi")->expected(4);
  simulate->add_option("--ensemble", sim.ensemble, "trajectories")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--horizon", sim.horizon, "steps N")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--grid", sim.grid, "cells per axis for coverage")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--sampler", sim.sampler, "random or lattice")
      ->check(CLI::IsMember({"random", "lattice"}))
      ->capture_default_str();

  KoopmanOptions kop;
  CLI::App* koopman = app.add_subcommand("koopman", "build and dump an operator and its invariant projector");
  koopman->fallthrough();
  kop.map.attach(koopman);
  koopman->add_option("--basis", kop.basis, "fourier or ulam")
      ->check(CLI::IsMember({"fourier", "ulam"}))
      ->capture_default_str();
  koopman->add_option("--cutoff", kop.cutoff, "Fourier cutoff")->check(CLI::PositiveNumber)->capture_default_str();
  koopman->add_option("--grid", kop.grid, "Ulam cells per axis")->check(CLI::PositiveNumber)->capture_default_str();
  koopman->add_option("--samples", kop.samples, "Ulam samples per cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  koopman->add_option("--tolerance", kop.tolerance, "Cesaro tolerance")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (list->parsed()) return run_list(g, out);
    if (experiment->parsed()) return run_experiment_command(g, name, out);
    if (simulate->parsed()) return run_simulate(g, sim, out);
    return run_koopman(g, kop, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace ergostab
