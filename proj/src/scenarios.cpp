#include "ergostab/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "ergostab/averaging.hpp"
#include "ergostab/errors.hpp"
#include "ergostab/koopman.hpp"
#include "ergostab/maps.hpp"

namespace ergostab {

namespace {

using Clock = std::chrono::steady_clock;

class PhaseTimer {
 public:
  explicit PhaseTimer(Report& report) : report_(report), last_(Clock::now()) {}

  void mark(std::string phase) {
    const auto now = Clock::now();
    report_.timings.emplace_back(std::move(phase), std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  Report& report_;
  Clock::time_point last_;
};

// splitmix64 finalizer over (seed, tag)
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const char* pass_fail(bool ok) { return ok ? "pass" : "fail"; }

template <class P>
const P& params_of(const ExperimentConfig& config, const std::string& scenario) {
  validate(config);
  if (config.scenario != scenario) {
    throw ConfigError("scenario", "expected '" + scenario + "', got '" + config.scenario + "'");
  }
  const P* p = std::get_if<P>(&config.params);
  if (p == nullptr) throw ConfigError("parameters", "parameters do not belong to scenario '" + scenario + "'");
  return *p;
}

Report make_report(const ExperimentConfig& config) {
  Report r;
  r.scenario = config.scenario;
  r.config = config;
  r.rows = ContinuityCurve(config.scenario);
  return r;
}

void add_row(Report& r, std::int64_t index, std::string desc, std::uint64_t horizon, double value, double se = 0.0,
             std::string verdict = "") {
  r.rows.add(CurveRow{index, std::move(desc), horizon, value, se, std::move(verdict)});
}

/// Cells of an n-cell periodic axis that meet `iv`.
std::size_t cells_meeting(const Interval& iv, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const double lo = static_cast<double>(c) / static_cast<double>(n);
    const double hi = static_cast<double>(c + 1) / static_cast<double>(n);
    const bool hit = iv.lo <= iv.hi ? (lo < iv.hi && hi > iv.lo) : (hi > iv.lo || lo < iv.hi);
    if (hit) ++count;
  }
  return count;
}

/// [corner, corner + side) reduced to the unit circle.
Interval periodic_interval(double corner, double side) {
  const double lo = wrap_unit(corner);
  double hi = lo + side;
  if (hi > 1.0) hi -= 1.0;
  return Interval{lo, hi};
}

std::vector<double> linspace(double start, double stop, std::size_t steps) {
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    out[i] = steps == 1 ? start
                        : start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct TransitionSetup {
  std::function<MapDef(double)> make_map;
  std::size_t extra_angles = 0;
};

void run_transition(Report& report, PhaseTimer& timer, const DissipativeParams& p, std::uint64_t seed,
                    const TransitionSetup& setup, Parallelism par) {
  const auto& tol = p.tolerances;
  const PhaseSpace space = PhaseSpace::cylinder().with_angles(setup.extra_angles);
  std::vector<Interval> source_iv{{p.source_p[0], p.source_p[1]}, {0.0, 1.0}};
  std::vector<Interval> trap_iv{{-p.trap_half_width, p.trap_half_width}, {0.0, 1.0}};
  for (std::size_t i = 0; i < setup.extra_angles; ++i) {
    source_iv.push_back({0.0, 1.0});
    trap_iv.push_back({0.0, 1.0});
  }
  const Region source = Region::box(space, source_iv, "source");
  const Region trap = Region::box(space, trap_iv, "trap");
  const EnsembleSpec ensemble{source, p.ensemble, Sampler::pseudo_random, derive_seed(seed, 1)};

  const std::vector<double> ks = linspace(p.k_start, p.k_stop, p.k_steps);
  const std::vector<std::uint64_t> summary_h = geometric_horizons(p.summary_first_horizon, p.summary_horizon_count);
  std::vector<double> summary;
  bool all_decay = true;
  std::string not_decaying;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const std::string label = "occupancy@K=" + num(ks[i]);
    const ContinuityCurve c = occupancy_decay(setup.make_map(ks[i]), ensemble, trap, summary_h, par, label);
    for (CurveRow row : c.rows()) {
      row.epsilon_index = static_cast<std::int64_t>(i);
      report.rows.add(std::move(row));
    }
    summary.push_back(c.rows().back().value);
    if (!(c.rows().back().value < c.rows().front().value)) {
      all_decay = false;
      not_decaying += " K=" + num(ks[i]);
    }
  }
  timer.mark("schedule");

  double max_jump = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const double jump = std::abs(summary[i] - summary[i - 1]);
    add_row(report, static_cast<std::int64_t>(i), "occupancy_jump@K=" + num(ks[i]), summary_h.back(), jump, 0.0,
            pass_fail(jump <= tol.max_jump));
    if (jump > max_jump) {
      max_jump = jump;
      worst = i;
    }
  }
  report.check("occupancy varies smoothly in K", max_jump <= tol.max_jump,
               "max adjacent jump " + num(max_jump) + (summary.size() > 1 ? " at K=" + num(ks[worst]) : "") +
                   " at N=" + std::to_string(summary_h.back()) + ", bound " + num(tol.max_jump));
  report.check("occupancy decreases with N for every K", all_decay,
               all_decay ? "occupancy at N=" + std::to_string(summary_h.back()) + " below N=" +
                               std::to_string(summary_h.front()) + " for all " + std::to_string(ks.size()) + " K"
                         : "not decreasing at" + not_decaying);

  const auto extra = static_cast<std::int64_t>(ks.size());
  const std::vector<std::uint64_t> decay_h = geometric_horizons(p.decay_first_horizon, p.decay_horizon_count);
  const ContinuityCurve decay = occupancy_decay(setup.make_map(p.decay_k), ensemble, trap, decay_h, par,
                                                "decay@K=" + num(p.decay_k));
  bool monotone = true;
  for (std::size_t i = 0; i < decay.size(); ++i) {
    CurveRow row = decay[i];
    row.epsilon_index = extra;
    if (i > 0 && !(decay[i].value < decay[i - 1].value)) monotone = false;
    report.rows.add(std::move(row));
  }
  report.check("occupancy at K=" + num(p.decay_k) + " decreases monotonically", monotone,
               "values at " + std::to_string(decay_h.size()) + " horizons from N=" + std::to_string(decay_h.front()) +
                   " to N=" + std::to_string(decay_h.back()) + (monotone ? " strictly decrease" : " do not decrease"));
  const PowerLawFit fit = fit_power_law(decay_h, decay.values());
  const bool exponent_ok = std::abs(fit.exponent - tol.exponent_target) <= tol.exponent_tolerance;
  add_row(report, extra, "decay_exponent@K=" + num(p.decay_k), decay_h.back(), fit.exponent, 0.0,
          pass_fail(exponent_ok));
  report.check("decay exponent", exponent_ok,
               "fitted exponent " + num(fit.exponent) + " (r^2 " + num(fit.r_squared) + "), target " +
                   num(tol.exponent_target) + " +- " + num(tol.exponent_tolerance));
  timer.mark("decay");

  const ContinuityCurve control = occupancy_decay(setup.make_map(p.control_k), ensemble, trap, summary_h, par,
                                                  "control@K=" + num(p.control_k));
  bool constant = true;
  for (const CurveRow& r : control.rows()) {
    CurveRow row = r;
    row.epsilon_index = extra + 1;
    if (r.value != control[0].value) constant = false;
    report.rows.add(std::move(row));
  }
  report.check("occupancy constant at K=" + num(p.control_k), constant,
               "control occupancy " + num(control[0].value) + (constant ? " at every horizon" : " changes with N"));
  timer.mark("control");
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog{
      {"rotation_approximants", "Rational approximants of an ergodic torus rotation",
       "Invariant-projector matrix elements of rational approximants converge to those of the ergodic rotation, "
       "and orbits of a disk of diameter delta cover the torus once D exceeds 1/delta."},
      {"source_detector", "Source and detector placements for ergodic and non-ergodic rotations",
       "For an ergodic map and its small perturbations the mean visit fraction of a detector equals its measure "
       "wherever source and detector are placed."},
      {"standard_map_counterexample", "Coverage of the torus standard map across a K sweep",
       "Invariant circles confine orbits at small K, so coverage from a small seed box jumps across a narrow K "
       "window."},
      {"dissipative_transition", "Trap occupancy of the cylinder standard map across a K schedule",
       "Without a bounded invariant set there is no stochasticity threshold: occupancy of a bounded trap varies "
       "smoothly with K and decays with time."},
      {"skew_quasiperiodic", "Dissipative transition with a quasi-periodically modulated kick",
       "Modulating the kick with incommensurate frequencies keeps the transition smooth."},
  };
  return catalog;
}

Report run_rotation_approximants(const ExperimentConfig& config, Parallelism par) {
  const auto& p = params_of<RotationApproximantsParams>(config, "rotation_approximants");
  const auto& tol = p.tolerances;
  Report report = make_report(config);
  PhaseTimer timer(report);

  const PhaseSpace torus = PhaseSpace::torus(2);
  const PerturbedFamily family = PerturbedFamily::rotation_approximants(p.alpha, p.beta, p.max_denominator);
  const std::vector<RationalApproximant> approx = convergents(p.alpha, p.max_denominator);
  if (approx.empty()) throw ConfigError("parameters.max_denominator", "no convergent with denominator >= 2");

  const std::vector<ProbePair> probes = default_probe_set(p.probe_cutoff);
  std::vector<Observable> psis;
  for (const ProbePair& pr : probes) psis.push_back(pr.psi);
  const Basis basis = FourierBasis{p.basis_cutoff};
  const InvariantProjector p0 = fourier_projector_rotation(Irrational{p.alpha}, p.beta, p.basis_cutoff);
  const KoopmanOperator u0 = fourier_koopman_rotation(p.alpha, p.beta, p.basis_cutoff);

  std::vector<CoboundaryResult> cob;
  for (const Observable& psi : psis) {
    const Eigen::VectorXcd c = to_basis(psi, basis);
    cob.push_back(coboundary_solve(Eigen::VectorXcd(c - p0.apply(c)), u0, tol.lemma_delta, &p0));
  }
  timer.mark("coboundary");

  const EnsembleSpec eta_spec{Region::whole(torus), p.eta_ensemble, Sampler::lattice, derive_seed(config.seed, 1)};
  const std::vector<PhasePoint> eta_starts = sample_ensemble(eta_spec);
  const auto base_table = birkhoff_table(family.base(), psis, eta_starts, p.horizon, par);
  timer.mark("base_trajectories");

  const Region source = Region::disk(p.source_center, p.delta, "source");
  const Region detector = Region::disk(p.detector_center, p.delta, "detector");
  const double mu_d = detector.volume();
  const EnsembleSpec visit_spec{source, p.visit_ensemble, Sampler::pseudo_random, derive_seed(config.seed, 2)};
  const EnsembleSpec cover_spec{source, p.coverage_ensemble, Sampler::pseudo_random, derive_seed(config.seed, 3)};
  const GridPartition coarse = GridPartition::uniform(torus, {p.coverage_grid, p.coverage_grid});
  const GridPartition fine = GridPartition::uniform(torus, {p.strip_grid, p.strip_grid});

  // the ergodic map itself
  const AverageResult visit0 = visit_fraction(family.base(), visit_spec, detector, p.horizon, par);
  const double visit_tol = std::max(tol.visit_se_factor * visit0.standard_error, tol.visit_floor);
  const bool visit_ok = std::abs(visit0.real() - mu_d) <= visit_tol;
  add_row(report, 0, "visit@irrational", p.horizon, visit0.real(), visit0.standard_error, pass_fail(visit_ok));
  const CoverageResult cover0 = coverage(family.base(), cover_spec, coarse, p.coverage_horizon, par);
  const bool cover0_ok = cover0.fraction >= tol.coverage_full;
  add_row(report, 0, "coverage@irrational", p.coverage_horizon, cover0.fraction, 0.0, pass_fail(cover0_ok));
  timer.mark("irrational");

  std::vector<double> oracle;
  bool traj_ok = true;
  bool residual_ok = true;
  bool slack_ok = true;
  bool full_ok = true;
  bool strip_ok = true;
  std::string traj_detail;
  std::string full_detail;
  std::string strip_detail;
  double worst_residual = 0.0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= approx.size(); ++k) {
    const RationalApproximant& a = approx[k - 1];
    const auto index = static_cast<std::int64_t>(k);
    const std::string at = "@D=" + std::to_string(a.denominator);
    const MapDef map = family.at(static_cast<double>(k));
    const InvariantProjector pe = fourier_projector_rotation(a, p.beta, p.basis_cutoff);
    const KoopmanOperator ue = fourier_koopman_rotation(a, p.beta, p.basis_cutoff);

    const double eta_o = eta(probes, pe, p0);
    oracle.push_back(eta_o);
    add_row(report, index, "eta_oracle" + at, 0, eta_o);

    const auto table = birkhoff_table(map, psis, eta_starts, p.horizon, par);
    const AverageResult eta_t = eta_trajectory(probes, eta_starts, table, base_table);
    const double eta_tol = std::max(tol.eta_se_factor * eta_t.standard_error, tol.eta_floor);
    const bool agree = std::abs(eta_t.real() - eta_o) <= eta_tol;
    traj_ok = traj_ok && agree;
    traj_detail += " D=" + std::to_string(a.denominator) + ":" + num(std::abs(eta_t.real() - eta_o)) + "/" +
                   num(eta_tol);
    add_row(report, index, "eta_trajectory" + at, p.horizon, eta_t.real(), eta_t.standard_error, pass_fail(agree));

    double residual = 0.0;
    double slack = std::numeric_limits<double>::infinity();
    const BasisMatrix du = ue.matrix - u0.matrix;
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const double eta_j = eta(probes[j].phi, probes[j].psi, pe, p0);
      const double moved = basis_norm(basis, du.apply(cob[j].chi));
      residual = std::max(residual, cob[j].residual);
      slack = std::min(slack, tol.lemma_delta / 2.0 + moved - eta_j);
    }
    residual_ok = residual_ok && residual <= tol.lemma_delta / 2.0;
    slack_ok = slack_ok && slack >= 0.0;
    worst_residual = std::max(worst_residual, residual);
    worst_slack = std::min(worst_slack, slack);
    add_row(report, index, "lemma_residual" + at, 0, residual, 0.0, pass_fail(residual <= tol.lemma_delta / 2.0));
    add_row(report, index, "lemma_slack" + at, 0, slack, 0.0, pass_fail(slack >= 0.0));
    timer.mark("eta" + at);

    const AverageResult visit = visit_fraction(map, visit_spec, detector, p.horizon, par);
    add_row(report, index, "visit" + at, p.horizon, visit.real(), visit.standard_error);

    const double strips = static_cast<double>(a.denominator) * p.delta;
    const CoverageResult cov = coverage(map, cover_spec, coarse, p.coverage_horizon, par);
    const CoverageResult cov_fine = coverage(map, cover_spec, fine, p.coverage_horizon, par);
    std::string cov_verdict;
    std::string fine_verdict;
    if (strips > 1.0) {
      const bool ok = cov.fraction >= tol.coverage_full;
      full_ok = full_ok && ok;
      full_detail += " D=" + std::to_string(a.denominator) + ":" + num(cov.fraction);
      cov_verdict = pass_fail(ok);
    } else if (strips < 1.0) {
      const bool ok = std::abs(cov_fine.fraction - strips) <= tol.strip;
      strip_ok = strip_ok && ok;
      strip_detail += " D=" + std::to_string(a.denominator) + ":" + num(cov_fine.fraction) + "/" + num(strips);
      fine_verdict = pass_fail(ok);
    }
    add_row(report, index, "coverage" + at, p.coverage_horizon, cov.fraction, 0.0, cov_verdict);
    add_row(report, index, "coverage_fine" + at, p.coverage_horizon, cov_fine.fraction, 0.0, fine_verdict);
    timer.mark("visits" + at);
  }

  bool non_increasing = true;
  for (std::size_t i = 1; i < oracle.size(); ++i) non_increasing = non_increasing && oracle[i] <= oracle[i - 1];
  std::string oracle_values;
  for (double v : oracle) oracle_values += " " + num(v);
  report.check("eta oracle non-increasing along convergents", non_increasing, "eta:" + oracle_values);
  report.check("eta at the last convergent", oracle.back() < tol.eta_last_max,
               "eta " + num(oracle.back()) + " < " + num(tol.eta_last_max));
  report.check("trajectory eta matches the oracle", traj_ok,
               "|difference|/tolerance (max of " + num(tol.eta_se_factor) + " SE and " + num(tol.eta_floor) +
                   "):" + traj_detail);
  report.check("coboundary residual", residual_ok,
               "max residual " + num(worst_residual) + " <= delta/2 = " + num(tol.lemma_delta / 2.0));
  report.check("lemma slack", slack_ok, "min slack " + num(worst_slack) + " >= 0");
  report.check("full coverage when D delta > 1", full_ok,
               "coverage >= " + num(tol.coverage_full) + (full_detail.empty() ? " (no such D)" : ":" + full_detail));
  report.check("strip coverage when D delta < 1", strip_ok,
               "|coverage - D delta| <= " + num(tol.strip) + " on " + std::to_string(p.strip_grid) + "^2 grid" +
                   (strip_detail.empty() ? " (no such D)" : ":" + strip_detail));
  report.check("coverage of the ergodic rotation", cover0_ok,
               "coverage " + num(cover0.fraction) + " >= " + num(tol.coverage_full));
  report.check("visit fraction of the ergodic rotation", visit_ok,
               "visit " + num(visit0.real()) + ", mu(D) " + num(mu_d) + ", tolerance " + num(visit_tol));
  return report;
}

Report run_source_detector(const ExperimentConfig& config, Parallelism par) {
  const auto& p = params_of<SourceDetectorParams>(config, "source_detector");
  const auto& tol = p.tolerances;
  Report report = make_report(config);
  PhaseTimer timer(report);
  const PhaseSpace torus = PhaseSpace::torus(2);

  struct Case {
    std::string name;
    MapDef map;
    bool ergodic;
  };
  std::vector<Case> cases{{"base", MapDef(TorusRotation{p.alpha, p.beta}), true}};
  for (const RationalApproximant& a : convergents(p.alpha, p.perturbation_max_denominator)) {
    if (a.denominator < p.perturbation_min_denominator) continue;
    cases.push_back({"D=" + std::to_string(a.denominator), MapDef(TorusRotation{a.value(), p.beta}), true});
  }
  const RationalApproximant control = rational(p.control_numerator, p.control_denominator);
  cases.push_back({"control", MapDef(TorusRotation{control.value(), p.beta}), false});

  std::vector<Region> sources;
  std::vector<Region> detectors;
  std::vector<Observable> psis;
  for (double y : p.source_corners) {
    for (double x : p.source_corners) {
      sources.push_back(Region::box(torus, {periodic_interval(x, p.source_side), periodic_interval(y, p.source_side)},
                                    "S" + std::to_string(sources.size())));
    }
  }
  for (double y : p.detector_corners) {
    for (double x : p.detector_corners) {
      detectors.push_back(
          Region::box(torus, {periodic_interval(x, p.detector_side), periodic_interval(y, p.detector_side)},
                      "D" + std::to_string(detectors.size())));
      psis.push_back(Observable::indicator(detectors.back()));
    }
  }
  psis.push_back(Observable::indicator(Region::whole(torus, {}, "torus")));
  const double mu_d = p.detector_side * p.detector_side;

  double worst_base = 0.0;
  double worst_pert = 0.0;
  std::size_t base_fail = 0;
  std::size_t pert_fail = 0;
  std::size_t torus_fail = 0;
  std::size_t violations = 0;
  double control_max = 0.0;
  for (std::size_t e = 0; e < cases.size(); ++e) {
    const Case& c = cases[e];
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const EnsembleSpec spec{sources[s], p.ensemble, Sampler::pseudo_random, derive_seed(config.seed, 100 + s)};
      const std::vector<AverageResult> res = itea_many(c.map, spec, psis, p.horizon, par);
      for (std::size_t d = 0; d < res.size(); ++d) {
        const bool whole = d + 1 == res.size();
        const std::string desc =
            "visit@" + c.name + "/S" + std::to_string(s) + "/" + (whole ? "torus" : "D" + std::to_string(d));
        const double v = res[d].real();
        const double se = res[d].standard_error;
        std::string verdict;
        if (whole) {
          const bool ok = std::abs(v - 1.0) <= 1e-12;
          if (!ok) ++torus_fail;
          verdict = pass_fail(ok);
        } else if (c.ergodic) {
          const double dev = std::abs(v - mu_d);
          const bool ok = dev <= std::max(tol.se_factor * se, tol.floor);
          if (e == 0) {
            worst_base = std::max(worst_base, dev);
            if (!ok) ++base_fail;
          } else {
            worst_pert = std::max(worst_pert, dev);
            if (!ok) ++pert_fail;
          }
          verdict = pass_fail(ok);
        } else {
          const double dev = std::abs(v - mu_d);
          control_max = std::max(control_max, dev);
          if (dev > std::max(tol.control_se_factor * se, tol.floor)) {
            ++violations;
            verdict = "violation";
          }
        }
        add_row(report, static_cast<std::int64_t>(e), desc, p.horizon, v, se, verdict);
      }
    }
    timer.mark(c.name);
  }

  const std::string placements = std::to_string(sources.size()) + "x" + std::to_string(detectors.size());
  report.check("ergodic rotation: visit fraction equals mu(D) for every placement", base_fail == 0,
               std::to_string(base_fail) + " of " + placements + " outside max(" + num(tol.se_factor) + " SE, " +
                   num(tol.floor) + "); max deviation " + num(worst_base));
  report.check("perturbed rotations: visit fraction equals mu(D) for every placement", pert_fail == 0 && cases.size() > 2,
               std::to_string(cases.size() - 2) + " perturbations, " + std::to_string(pert_fail) +
                   " placements outside tolerance; max deviation " + num(worst_pert));
  report.check("whole-torus detector", torus_fail == 0, std::to_string(torus_fail) + " fractions differ from 1");
  report.check("non-ergodic control deviates", violations > 0,
               std::to_string(violations) + " placements deviate by more than max(" + num(tol.control_se_factor) +
                   " SE, " + num(tol.floor) + "); max deviation " + num(control_max));
  return report;
}

Report run_standard_map_counterexample(const ExperimentConfig& config, Parallelism par) {
  const auto& p = params_of<StandardMapParams>(config, "standard_map_counterexample");
  const auto& tol = p.tolerances;
  Report report = make_report(config);
  PhaseTimer timer(report);

  const PhaseSpace torus = PhaseSpace::torus(2);
  const PerturbedFamily family = PerturbedFamily::k_sweep(MapDef(StandardMapTorus{0.0}));
  const Interval p_range{p.seed_box[0], p.seed_box[1]};
  const Region seed_box = Region::box(torus, {p_range, Interval{p.seed_box[2], p.seed_box[3]}}, "seed");
  const EnsembleSpec spec{seed_box, p.ensemble, Sampler::pseudo_random, derive_seed(config.seed, 1)};
  const GridPartition grid = GridPartition::uniform(torus, {p.grid, p.grid});

  std::vector<double> values;
  for (std::size_t i = 0; i < p.k_values.size(); ++i) {
    const double k = p.k_values[i];
    const CoverageResult c = coverage(family.at(k), spec, grid, p.horizon, par);
    values.push_back(c.fraction);
    add_row(report, static_cast<std::int64_t>(i), "coverage@K=" + num(k), p.horizon, c.fraction);
    if (i > 0) {
      const double jump = c.fraction - values[i - 1];
      add_row(report, static_cast<std::int64_t>(i), "coverage_jump@K=" + num(k), p.horizon, jump);
    }
    timer.mark("K=" + num(k));
  }

  auto value_at = [&](double k) -> const double* {
    for (std::size_t i = 0; i < p.k_values.size(); ++i) {
      if (p.k_values[i] == k) return &values[i];
    }
    return nullptr;
  };
  if (const double* zero = value_at(0.0)) {
    const double strips = static_cast<double>(cells_meeting(p_range, p.grid)) / static_cast<double>(p.grid);
    report.check("K=0 coverage equals the strip measure", *zero == strips,
                 "coverage " + num(*zero) + ", cells meeting the seed momenta give " + num(strips));
  }
  const double* low = value_at(tol.low_k);
  report.check("coverage at K=" + num(tol.low_k), low != nullptr && *low < tol.low_max,
               low == nullptr ? "K not in the schedule" : "coverage " + num(*low) + " < " + num(tol.low_max));
  const double* high = value_at(tol.high_k);
  report.check("coverage at K=" + num(tol.high_k), high != nullptr && *high > tol.high_min,
               high == nullptr ? "K not in the schedule" : "coverage " + num(*high) + " > " + num(tol.high_min));
  return report;
}

Report run_dissipative_transition(const ExperimentConfig& config, Parallelism par) {
  const auto& p = params_of<DissipativeParams>(config, "dissipative_transition");
  Report report = make_report(config);
  PhaseTimer timer(report);
  const TransitionSetup setup{[](double k) { return MapDef(StandardMapCylinder{k}); }, 0};
  run_transition(report, timer, p, config.seed, setup, par);
  return report;
}

Report run_skew_quasiperiodic(const ExperimentConfig& config, Parallelism par) {
  const auto& p = params_of<SkewParams>(config, "skew_quasiperiodic");
  Report report = make_report(config);
  PhaseTimer timer(report);
  const TransitionSetup setup{[&](double k) { return MapDef::skew(MapDef(StandardMapCylinder{k}), p.frequencies, p.modulation); },
                              p.frequencies.size()};
  run_transition(report, timer, p.transition, config.seed, setup, par);

  const MapDef torus_skew = MapDef::skew(MapDef(StandardMapTorus{p.ulam_k}), p.frequencies, p.modulation);
  const std::vector<std::size_t> cells(torus_skew.space().dim(), p.ulam_cells_per_axis);
  const GridPartition grid = GridPartition::uniform(torus_skew.space(), cells);
  const KoopmanOperator u = ulam_matrix(torus_skew, grid, p.ulam_samples, derive_seed(config.seed, 9), par);
  const Eigen::VectorXd colsum = u.matrix.real_matrix().colwise().sum().transpose();
  const double deviation = (colsum.array() - 1.0).abs().maxCoeff();
  const double bound = p.ulam_sigma_factor / std::sqrt(static_cast<double>(p.ulam_samples));
  add_row(report, 0, "ulam_column_deviation@K=" + num(p.ulam_k), 1, deviation, 0.0, pass_fail(deviation <= bound));
  report.check("one-step pushforward preserves cell occupancy", deviation <= bound,
               "max |column sum - 1| " + num(deviation) + " over " + std::to_string(grid.cell_count()) +
                   " cells, bound " + num(bound));
  timer.mark("ulam");
  return report;
}

Report run_experiment(const ExperimentConfig& config, Parallelism par) {
  validate(config);
  if (config.scenario == "rotation_approximants") return run_rotation_approximants(config, par);
  if (config.scenario == "source_detector") return run_source_detector(config, par);
  if (config.scenario == "standard_map_counterexample") return run_standard_map_counterexample(config, par);
  if (config.scenario == "dissipative_transition") return run_dissipative_transition(config, par);
  if (config.scenario == "skew_quasiperiodic") return run_skew_quasiperiodic(config, par);
  throw ConfigError("scenario", "unknown scenario '" + config.scenario + "'");
}

}  // namespace ergostab
