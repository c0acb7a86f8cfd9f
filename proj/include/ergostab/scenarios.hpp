#pragma once

#include <string>
#include <vector>

#include "ergostab/config.hpp"
#include "ergostab/parallel.hpp"
#include "ergostab/report.hpp"

namespace ergostab {

struct ScenarioInfo {
  std::string name;
  std::string summary;
  /// The claim the scenario checks, in one sentence.
  std::string claim;
};

/// One entry per name of scenario_names(), same order.
const std::vector<ScenarioInfo>& scenario_catalog();

/// Convergent sweep of the torus rotation: eta from the Fourier oracle and
/// from trajectories, the coboundary bound, visit fractions and coverage.
Report run_rotation_approximants(const ExperimentConfig& config, Parallelism par = {});

/// Grid of source/detector placements for the ergodic rotation, nearby
/// rational rotations and a non-ergodic control.
Report run_source_detector(const ExperimentConfig& config, Parallelism par = {});

/// Coverage of the torus standard map from a small seed box across a K sweep.
Report run_standard_map_counterexample(const ExperimentConfig& config, Parallelism par = {});

/// Trap occupancy of the cylinder standard map across a K schedule.
Report run_dissipative_transition(const ExperimentConfig& config, Parallelism par = {});

/// The dissipative transition with a quasi-periodically modulated kick.
Report run_skew_quasiperiodic(const ExperimentConfig& config, Parallelism par = {});

/// Dispatches on config.scenario after validation.
Report run_experiment(const ExperimentConfig& config, Parallelism par = {});

}  // namespace ergostab
