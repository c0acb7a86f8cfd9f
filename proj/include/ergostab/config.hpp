#pragma once

#include <array>
#include <cstdint>
#include <json.hpp>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace ergostab {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;
inline constexpr double kGoldenMean = 0.6180339887498949;  // (sqrt 5 - 1) / 2
inline constexpr double kSilverFraction = std::numbers::sqrt2 - 1.0;

struct RotationApproximantsParams {
  double alpha = kGoldenMean;
  double beta = kSilverFraction;
  std::int64_t max_denominator = 21;
  /// Source and detector disk diameter.
  double delta = 0.1;
  std::array<double, 2> source_center{0.25, 0.25};
  std::array<double, 2> detector_center{0.7, 0.55};
  std::uint64_t horizon = 100000;
  std::size_t visit_ensemble = 200;
  std::size_t eta_ensemble = 64;
  int probe_cutoff = 8;
  int basis_cutoff = 16;
  std::size_t coverage_grid = 64;
  std::size_t strip_grid = 256;
  std::uint64_t coverage_horizon = 20000;
  std::size_t coverage_ensemble = 400;

  struct Tolerances {
    double coverage_full = 0.99;
    double strip = 0.05;
    double eta_last_max = 0.05;
    double eta_se_factor = 3.0;
    double eta_floor = 1e-2;
    double visit_se_factor = 3.0;
    double visit_floor = 5e-3;
    double lemma_delta = 0.1;
  } tolerances;
};

struct SourceDetectorParams {
  double alpha = kGoldenMean;
  double beta = kSilverFraction;
  double source_side = 0.1;
  std::vector<double> source_corners{0.05, 0.45, 0.85};
  double detector_side = 0.25;
  std::vector<double> detector_corners{0.0, 0.375, 0.8};
  std::size_t ensemble = 64;
  std::uint64_t horizon = 20000;
  /// Perturbations: convergents of alpha with denominators in this range.
  std::int64_t perturbation_min_denominator = 34;
  std::int64_t perturbation_max_denominator = 144;
  std::int64_t control_numerator = 1;
  std::int64_t control_denominator = 2;

  struct Tolerances {
    double se_factor = 3.0;
    double floor = 5e-3;
    double control_se_factor = 10.0;
  } tolerances;
};

struct StandardMapParams {
  std::vector<double> k_values{0.0, 0.25, 0.5, 0.75, 0.97, 1.2, 1.5, 2.0};
  /// Seed box [p_lo, p_hi) x [q_lo, q_hi).
  std::array<double, 4> seed_box{0.0, 0.05, 0.0, 0.05};
  std::size_t grid = 64;
  std::size_t ensemble = 100;
  std::uint64_t horizon = 100000;

  struct Tolerances {
    double low_k = 0.5;
    double low_max = 0.5;
    double high_k = 2.0;
    double high_min = 0.9;
  } tolerances;
};

struct DissipativeParams {
  double k_start = 4.0;
  double k_stop = 10.0;
  std::size_t k_steps = 13;
  /// Source momentum band; q is uniform on [0,1).
  std::array<double, 2> source_p{-0.05, 0.05};
  double trap_half_width = std::numbers::pi;
  std::size_t ensemble = 64;
  std::uint64_t summary_first_horizon = 1000;
  std::size_t summary_horizon_count = 7;
  double decay_k = 8.0;
  std::uint64_t decay_first_horizon = 1000;
  std::size_t decay_horizon_count = 11;
  /// Integrable control run; occupancy must stay constant.
  double control_k = 0.0;

  struct Tolerances {
    double max_jump = 0.1;
    double exponent_target = -0.5;
    double exponent_tolerance = 0.2;
  } tolerances;
};

struct SkewParams {
  DissipativeParams transition;
  std::vector<double> frequencies{kGoldenMean, kSilverFraction};
  std::vector<double> modulation{0.25, 0.25};
  /// One-step pushforward check of the extended map on the torus base.
  double ulam_k = 1.2;
  std::size_t ulam_cells_per_axis = 4;
  std::size_t ulam_samples = 400;
  double ulam_sigma_factor = 5.0;
};

using ScenarioParams =
    std::variant<RotationApproximantsParams, SourceDetectorParams, StandardMapParams, DissipativeParams, SkewParams>;

struct ExperimentConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  ScenarioParams params;
};

/// Names accepted by default_config / parse_config, in catalog order.
const std::vector<std::string>& scenario_names();

/// Defaults for a scenario. ConfigError for an unknown name.
ExperimentConfig default_config(const std::string& scenario);

/// Parses JSON text. Missing fields keep their defaults; unknown fields,
/// wrong types and invalid values raise ConfigError naming the field path,
/// syntax errors name `source:line:column`. When the text has no
/// "scenario" field, `fallback_scenario` is used.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>",
                              const std::string& fallback_scenario = "");

/// Reads and parses a file. ConfigError when it cannot be read.
ExperimentConfig load_config(const std::string& path, const std::string& fallback_scenario = "");

Json to_json(const ExperimentConfig& config);
/// Canonical text: two-space indented JSON plus a trailing newline.
std::string serialize_config(const ExperimentConfig& config);

/// Semantic checks shared by parsing and programmatic construction.
void validate(const ExperimentConfig& config);

/// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace ergostab
