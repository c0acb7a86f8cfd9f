// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ergostab/averaging.hpp"
#include "ergostab/koopman.hpp"
#include "ergostab/report.hpp"
#include "ergostab/scenarios.hpp"

using namespace ergostab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    passed = passed && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "[x] ") + what;
  }
};

const Verdict& verdict(const Report& r, const std::string& name) {
  for (const Verdict& v : r.verdicts) {
    if (v.name == name) return v;
  }
  throw std::runtime_error(r.scenario + " has no verdict '" + name + "'");
}

void require_verdict(Outcome& o, const Report& r, const std::string& name) {
  const Verdict& v = verdict(r, name);
  o.require(v.passed, name + " (" + v.detail + ")");
}

const CurveRow& row(const Report& r, const std::string& desc) {
  for (const CurveRow& c : r.rows.rows()) {
    if (c.epsilon_desc == desc) return c;
  }
  throw std::runtime_error(r.scenario + " has no row '" + desc + "'");
}

std::string csv_of(const Report& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

// Criterion 1: ensemble time average against the Fourier oracle.
Outcome time_vs_ensemble_average() {
  const PhaseSpace torus = PhaseSpace::torus(2);
  const Region source = Region::box(torus, {{0.0, 0.2}, {0.0, 0.2}});
  const Region detector = Region::box(torus, {{0.5, 0.75}, {0.25, 0.5}});
  const FourierBasis basis{8};
  const InvariantProjector p = fourier_projector_rotation(RotationNumber(Irrational{kGoldenMean}), kSilverFraction, 8);
  const Eigen::VectorXcd phi = to_basis(Observable::indicator(source), basis) / source.volume();
  const Eigen::VectorXcd p_psi = p.apply(to_basis(Observable::indicator(detector), basis));
  const double oracle = basis_inner(basis, phi, p_psi).real();

  const auto t0 = Clock::now();
  const AverageResult r = visit_fraction(MapDef(TorusRotation{kGoldenMean, kSilverFraction}),
                                         {source, 200, Sampler::pseudo_random, 1}, detector, 100000, Parallelism{1});
  const double elapsed = seconds_since(t0);
  const double tol = std::max(3.0 * r.standard_error, 5e-3);

  Outcome o;
  o.require(std::abs(oracle - 1.0 / 16.0) <= 1e-12, "oracle " + fmt(oracle));
  o.require(std::abs(r.real() - oracle) <= tol,
            "itea " + fmt(r.real()) + " +- " + fmt(r.standard_error) + ", |diff| <= " + fmt(tol));
  o.require(elapsed < 5.0, "single-threaded " + fmt(elapsed) + " s < 5 s");
  return o;
}

// Criterion 4: Ulam projectors of the torus standard map.
Outcome ulam_projector_algebra() {
  const auto t0 = Clock::now();
  const GridPartition grid = GridPartition::uniform(PhaseSpace::torus(2), {32, 32});
  Outcome o;
  for (double k : {0.5, 1.2}) {
    const KoopmanOperator u = ulam_matrix(MapDef(StandardMapTorus{k}), grid, 400, 1);
    const InvariantProjector p = cesaro_projector(u);
    const double idem = idempotency_residual(p);
    const double inv = invariance_residual(p, u);
    o.require(idem <= 1e-6, "K=" + fmt(k) + " ||P^2-P|| " + fmt(idem) + " <= 1e-6");
    o.require(inv <= 1e-4, "K=" + fmt(k) + " ||PU-P|| " + fmt(inv) + " <= 1e-4");
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 30.0, fmt(elapsed) + " s < 30 s");
  return o;
}

// Criterion 5 oracle: fraction of the p-cells of an n-cell grid meeting the
// union of the strips (c - r + k/D, c + r + k/D), k = 0..D-1.
double strip_union_oracle(double center, double radius, std::int64_t d, std::size_t n) {
  std::vector<bool> hit(n, false);
  for (std::int64_t k = 0; k < d; ++k) {
    const double lo = center - radius + static_cast<double>(k) / static_cast<double>(d);
    const double hi = center + radius + static_cast<double>(k) / static_cast<double>(d);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = static_cast<double>(j) / static_cast<double>(n);
      const double b = static_cast<double>(j + 1) / static_cast<double>(n);
      // compare on the unrolled line and its unit shifts
      for (double s : {-1.0, 0.0, 1.0}) {
        if (a + s < hi && b + s > lo) hit[j] = true;
      }
    }
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), true)) / static_cast<double>(n);
}

Outcome coverage_claims(const Report& rotation) {
  const auto& p = std::get<RotationApproximantsParams>(rotation.config.params);
  Outcome o;
  const double d13 = row(rotation, "coverage@D=13").value;
  o.require(d13 >= 0.99, "D=13 coverage " + fmt(d13) + " >= 0.99");
  const double d5 = row(rotation, "coverage_fine@D=5").value;
  o.require(d5 >= 0.45 && d5 <= 0.55, "D=5 coverage " + fmt(d5) + " in [0.45, 0.55]");
  const double oracle = strip_union_oracle(p.source_center[0], p.delta / 2.0, 5, p.strip_grid);
  const double cell = 1.0 / static_cast<double>(p.strip_grid);
  o.require(std::abs(d5 - oracle) <= 2.0 * 5.0 * cell, "strip-union oracle " + fmt(oracle));
  const double irr = row(rotation, "coverage@irrational").value;
  o.require(irr >= 0.99, "irrational coverage " + fmt(irr) + " >= 0.99");
  return o;
}

// Criterion 6 oracle: the same experiment written as a plain loop with its own RNG.
double standard_map_oracle(double k, const StandardMapParams& p) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = p.grid;
  std::vector<bool> seen(n * n, false);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j < p.ensemble; ++j) {
    double x = p.seed_box[0] + (p.seed_box[1] - p.seed_box[0]) * u(rng);
    double y = p.seed_box[2] + (p.seed_box[3] - p.seed_box[2]) * u(rng);
    for (std::uint64_t t = 0; t < p.horizon; ++t) {
      const auto ix = std::min(n - 1, static_cast<std::size_t>(x * static_cast<double>(n)));
      const auto iy = std::min(n - 1, static_cast<std::size_t>(y * static_cast<double>(n)));
      seen[ix + n * iy] = true;
      x += k / two_pi * std::sin(two_pi * y);
      x -= std::floor(x);
      y += x;
      y -= std::floor(y);
    }
  }
  return static_cast<double>(std::count(seen.begin(), seen.end(), true)) / static_cast<double>(n * n);
}

Outcome standard_map_counterexample(const Report& report) {
  const auto& p = std::get<StandardMapParams>(report.config.params);
  Outcome o;
  require_verdict(o, report, "coverage at K=" + fmt(p.tolerances.low_k));
  require_verdict(o, report, "coverage at K=" + fmt(p.tolerances.high_k));
  for (double k : {p.tolerances.low_k, p.tolerances.high_k}) {
    const double lib = row(report, "coverage@K=" + fmt(k)).value;
    const double oracle = standard_map_oracle(k, p);
    o.require(std::abs(lib - oracle) <= 0.05, "K=" + fmt(k) + " plain-loop oracle " + fmt(oracle));
  }
  return o;
}

Outcome dissipative_smoothness(const Report& dissipative, const Report& skew) {
  Outcome o;
  for (const Report* r : {&dissipative, &skew}) {
    const auto& t = r->scenario == "skew_quasiperiodic" ? std::get<SkewParams>(r->config.params).transition
                                                         : std::get<DissipativeParams>(r->config.params);
    const std::string tag = r->scenario + ": ";
    const Verdict& jump = verdict(*r, "occupancy varies smoothly in K");
    o.require(jump.passed, tag + jump.name + " (" + jump.detail + ")");
    const Verdict& mono = verdict(*r, "occupancy at K=" + fmt(t.decay_k) + " decreases monotonically");
    o.require(mono.passed, tag + mono.name + " (" + mono.detail + ")");
  }
  return o;
}

}  // namespace

int main() {
  std::map<std::string, Report> first;
  std::map<std::string, double> runtime;
  for (const ScenarioInfo& s : scenario_catalog()) {
    const auto t0 = Clock::now();
    first.emplace(s.name, run_experiment(default_config(s.name), Parallelism{1}));
    runtime[s.name] = seconds_since(t0);
    std::cout << "ran " << s.name << " in " << fmt(runtime[s.name]) << " s\n" << std::flush;
  }

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  criteria.emplace_back("time average equals the invariant projection", time_vs_ensemble_average);
  criteria.emplace_back("eta decreases along convergents", [&] {
    Outcome o;
    const Report& r = first.at("rotation_approximants");
    require_verdict(o, r, "eta oracle non-increasing along convergents");
    require_verdict(o, r, "eta at the last convergent");
    require_verdict(o, r, "trajectory eta matches the oracle");
    return o;
  });
  criteria.emplace_back("coboundary bound on eta", [&] {
    Outcome o;
    const Report& r = first.at("rotation_approximants");
    require_verdict(o, r, "coboundary residual");
    require_verdict(o, r, "lemma slack");
    return o;
  });
  criteria.emplace_back("Ulam projector algebra", ulam_projector_algebra);
  criteria.emplace_back("coverage of rational approximants",
                        [&] { return coverage_claims(first.at("rotation_approximants")); });
  criteria.emplace_back("standard map coverage", [&] {
    return standard_map_counterexample(first.at("standard_map_counterexample"));
  });
  criteria.emplace_back("dissipative occupancy is smooth in K", [&] {
    return dissipative_smoothness(first.at("dissipative_transition"), first.at("skew_quasiperiodic"));
  });
  criteria.emplace_back("deterministic CSV across thread counts", [&] {
    Outcome o;
    for (const ScenarioInfo& s : scenario_catalog()) {
      const Report again = run_experiment(default_config(s.name), Parallelism{4});
      o.require(csv_of(again) == csv_of(first.at(s.name)), s.name);
    }
    return o;
  });

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += o.passed ? 0 : 1;
    std::cout << (o.passed ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << "\n"
              << std::flush;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
