#include "ergostab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ergostab/errors.hpp"

namespace ergostab {

namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "counts are read as 64-bit unsigned");

// Each parameter struct lists its fields once; the same list drives reading
// and writing.

class Writer {
 public:
  explicit Writer(Json& out) : out_(out) {}

  template <class T>
  void operator()(const char* key, const T& value) {
    out_[key] = value;
  }

  template <class Fn>
  void object(const char* key, Fn&& fn) {
    Json sub = Json::object();
    Writer w(sub);
    fn(w);
    out_[key] = std::move(sub);
  }

 private:
  Json& out_;
};

class Reader {
 public:
  Reader(const Json& in, std::string path) : in_(in), path_(std::move(path)) {
    if (!in_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void operator()(const char* key, double& v) {
    if (const Json* j = find(key)) {
      if (!j->is_number()) fail(key, "expected a number");
      v = j->get<double>();
      if (!std::isfinite(v)) fail(key, "expected a finite number");
    }
  }
  void operator()(const char* key, std::string& v) {
    if (const Json* j = find(key)) {
      if (!j->is_string()) fail(key, "expected a string");
      v = j->get<std::string>();
    }
  }
  void operator()(const char* key, std::uint64_t& v) {
    if (const Json* j = find(key)) v = unsigned_value(key, *j);
  }
  void operator()(const char* key, std::int64_t& v) {
    if (const Json* j = find(key)) v = signed_value(key, *j);
  }
  void operator()(const char* key, int& v) {
    if (const Json* j = find(key)) {
      const std::int64_t x = signed_value(key, *j);
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(key, "integer out of range");
      v = static_cast<int>(x);
    }
  }
  void operator()(const char* key, std::vector<double>& v) {
    if (const Json* j = find(key)) {
      if (!j->is_array()) fail(key, "expected an array of numbers");
      std::vector<double> out;
      for (const Json& e : *j) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
        if (!std::isfinite(out.back())) fail(key, "expected finite numbers");
      }
      v = std::move(out);
    }
  }
  template <std::size_t N>
  void operator()(const char* key, std::array<double, N>& v) {
    if (const Json* j = find(key)) {
      if (!j->is_array() || j->size() != N) fail(key, "expected an array of " + std::to_string(N) + " numbers");
      for (std::size_t i = 0; i < N; ++i) {
        if (!(*j)[i].is_number()) fail(key, "expected an array of " + std::to_string(N) + " numbers");
        v[i] = (*j)[i].get<double>();
        if (!std::isfinite(v[i])) fail(key, "expected finite numbers");
      }
    }
  }

  template <class Fn>
  void object(const char* key, Fn&& fn) {
    if (const Json* j = find(key)) {
      Reader r(*j, field(key));
      fn(r);
      r.finish();
    }
  }

  /// Rejects keys no field consumed.
  void finish() const {
    for (auto it = in_.begin(); it != in_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const Json* find(const char* key) {
    seen_.insert(key);
    const auto it = in_.find(key);
    return it == in_.end() ? nullptr : &*it;
  }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const char* key, const std::string& what) const { throw ConfigError(field(key), what); }

  std::uint64_t unsigned_value(const char* key, const Json& j) const {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    fail(key, "expected a non-negative integer");
  }
  std::int64_t signed_value(const char* key, const Json& j) const {
    if (j.is_number_integer()) {
      if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        fail(key, "integer out of range");
      }
      return j.get<std::int64_t>();
    }
    fail(key, "expected an integer");
  }

  const Json& in_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Io>
void fields(Io& io, RotationApproximantsParams& p) {
  io("alpha", p.alpha);
  io("beta", p.beta);
  io("max_denominator", p.max_denominator);
  io("delta", p.delta);
  io("source_center", p.source_center);
  io("detector_center", p.detector_center);
  io("horizon", p.horizon);
  io("visit_ensemble", p.visit_ensemble);
  io("eta_ensemble", p.eta_ensemble);
  io("probe_cutoff", p.probe_cutoff);
  io("basis_cutoff", p.basis_cutoff);
  io("coverage_grid", p.coverage_grid);
  io("strip_grid", p.strip_grid);
  io("coverage_horizon", p.coverage_horizon);
  io("coverage_ensemble", p.coverage_ensemble);
  io.object("tolerances", [&](auto& t) {
    t("coverage_full", p.tolerances.coverage_full);
    t("strip", p.tolerances.strip);
    t("eta_last_max", p.tolerances.eta_last_max);
    t("eta_se_factor", p.tolerances.eta_se_factor);
    t("eta_floor", p.tolerances.eta_floor);
    t("visit_se_factor", p.tolerances.visit_se_factor);
    t("visit_floor", p.tolerances.visit_floor);
    t("lemma_delta", p.tolerances.lemma_delta);
  });
}

template <class Io>
void fields(Io& io, SourceDetectorParams& p) {
  io("alpha", p.alpha);
  io("beta", p.beta);
  io("source_side", p.source_side);
  io("source_corners", p.source_corners);
  io("detector_side", p.detector_side);
  io("detector_corners", p.detector_corners);
  io("ensemble", p.ensemble);
  io("horizon", p.horizon);
  io("perturbation_min_denominator", p.perturbation_min_denominator);
  io("perturbation_max_denominator", p.perturbation_max_denominator);
  io("control_numerator", p.control_numerator);
  io("control_denominator", p.control_denominator);
  io.object("tolerances", [&](auto& t) {
    t("se_factor", p.tolerances.se_factor);
    t("floor", p.tolerances.floor);
    t("control_se_factor", p.tolerances.control_se_factor);
  });
}

template <class Io>
void fields(Io& io, StandardMapParams& p) {
  io("k_values", p.k_values);
  io("seed_box", p.seed_box);
  io("grid", p.grid);
  io("ensemble", p.ensemble);
  io("horizon", p.horizon);
  io.object("tolerances", [&](auto& t) {
    t("low_k", p.tolerances.low_k);
    t("low_max", p.tolerances.low_max);
    t("high_k", p.tolerances.high_k);
    t("high_min", p.tolerances.high_min);
  });
}

template <class Io>
void fields(Io& io, DissipativeParams& p) {
  io("k_start", p.k_start);
  io("k_stop", p.k_stop);
  io("k_steps", p.k_steps);
  io("source_p", p.source_p);
  io("trap_half_width", p.trap_half_width);
  io("ensemble", p.ensemble);
  io("summary_first_horizon", p.summary_first_horizon);
  io("summary_horizon_count", p.summary_horizon_count);
  io("decay_k", p.decay_k);
  io("decay_first_horizon", p.decay_first_horizon);
  io("decay_horizon_count", p.decay_horizon_count);
  io("control_k", p.control_k);
  io.object("tolerances", [&](auto& t) {
    t("max_jump", p.tolerances.max_jump);
    t("exponent_target", p.tolerances.exponent_target);
    t("exponent_tolerance", p.tolerances.exponent_tolerance);
  });
}

template <class Io>
void fields(Io& io, SkewParams& p) {
  fields(io, p.transition);
  io("frequencies", p.frequencies);
  io("modulation", p.modulation);
  io("ulam_k", p.ulam_k);
  io("ulam_cells_per_axis", p.ulam_cells_per_axis);
  io("ulam_samples", p.ulam_samples);
  io("ulam_sigma_factor", p.ulam_sigma_factor);
}

const std::vector<std::string> kScenarioNames{
    "rotation_approximants", "source_detector", "standard_map_counterexample", "dissipative_transition",
    "skew_quasiperiodic",
};

ScenarioParams default_params(const std::string& scenario) {
  if (scenario == kScenarioNames[0]) return RotationApproximantsParams{};
  if (scenario == kScenarioNames[1]) return SourceDetectorParams{};
  if (scenario == kScenarioNames[2]) return StandardMapParams{};
  if (scenario == kScenarioNames[3]) return DissipativeParams{};
  if (scenario == kScenarioNames[4]) return SkewParams{};
  std::string known;
  for (const auto& n : kScenarioNames) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("scenario", "unknown scenario '" + scenario + "' (known: " + known + ")");
}

// Validation helpers.
const std::string kParams = "parameters.";

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(kParams + field, what);
}

void require_unit(double v, const std::string& field) {
  require(v >= 0.0 && v < 1.0, field, "must lie in [0, 1)");
}

void check(const RotationApproximantsParams& p) {
  require(p.alpha > 0.0 && p.alpha < 1.0, "alpha", "must lie in (0, 1)");
  require(std::isfinite(p.beta), "beta", "must be finite");
  require(p.max_denominator >= 2, "max_denominator", "must be >= 2");
  require(p.delta > 0.0 && p.delta <= 1.0, "delta", "must lie in (0, 1]");
  for (double c : p.source_center) require_unit(c, "source_center");
  for (double c : p.detector_center) require_unit(c, "detector_center");
  require(p.horizon >= 1, "horizon", "must be >= 1");
  require(p.visit_ensemble >= 1, "visit_ensemble", "must be >= 1");
  require(p.eta_ensemble >= 2, "eta_ensemble", "must be >= 2");
  require(p.probe_cutoff >= 1 && p.probe_cutoff <= 64, "probe_cutoff", "must lie in [1, 64]");
  require(p.basis_cutoff >= p.probe_cutoff && p.basis_cutoff <= 64, "basis_cutoff",
          "must lie in [probe_cutoff, 64]");
  require(p.coverage_grid >= 1, "coverage_grid", "must be >= 1");
  require(p.strip_grid >= 1, "strip_grid", "must be >= 1");
  require(p.coverage_horizon >= 1, "coverage_horizon", "must be >= 1");
  require(p.coverage_ensemble >= 1, "coverage_ensemble", "must be >= 1");
  require(p.tolerances.lemma_delta > 0.0, "tolerances.lemma_delta", "must be > 0");
}

void check(const SourceDetectorParams& p) {
  require(p.alpha > 0.0 && p.alpha < 1.0, "alpha", "must lie in (0, 1)");
  require(std::isfinite(p.beta), "beta", "must be finite");
  require(p.source_side > 0.0 && p.source_side <= 1.0, "source_side", "must lie in (0, 1]");
  require(p.detector_side > 0.0 && p.detector_side <= 1.0, "detector_side", "must lie in (0, 1]");
  require(!p.source_corners.empty(), "source_corners", "must not be empty");
  require(!p.detector_corners.empty(), "detector_corners", "must not be empty");
  for (double c : p.source_corners) require_unit(c, "source_corners");
  for (double c : p.detector_corners) require_unit(c, "detector_corners");
  require(p.ensemble >= 2, "ensemble", "must be >= 2");
  require(p.horizon >= 1, "horizon", "must be >= 1");
  require(p.perturbation_min_denominator >= 2, "perturbation_min_denominator", "must be >= 2");
  require(p.perturbation_max_denominator >= p.perturbation_min_denominator, "perturbation_max_denominator",
          "must be >= perturbation_min_denominator");
  require(p.control_denominator >= 1, "control_denominator", "must be >= 1");
}

void check(const StandardMapParams& p) {
  require(!p.k_values.empty(), "k_values", "must not be empty");
  for (double k : p.k_values) require(k >= 0.0, "k_values", "must be >= 0");
  for (double c : p.seed_box) require_unit(c, "seed_box");
  require(p.seed_box[0] < p.seed_box[1] && p.seed_box[2] < p.seed_box[3], "seed_box", "needs lo < hi on both axes");
  require(p.grid >= 1, "grid", "must be >= 1");
  require(p.ensemble >= 1, "ensemble", "must be >= 1");
  require(p.horizon >= 1, "horizon", "must be >= 1");
}

void check(const DissipativeParams& p, const std::string& prefix = "") {
  require(p.k_steps >= 2, prefix + "k_steps", "must be >= 2");
  require(p.k_start >= 0.0 && p.k_stop > p.k_start, prefix + "k_stop", "needs 0 <= k_start < k_stop");
  require(p.source_p[0] < p.source_p[1], prefix + "source_p", "needs lo < hi");
  require(p.trap_half_width > 0.0, prefix + "trap_half_width", "must be > 0");
  require(p.ensemble >= 2, prefix + "ensemble", "must be >= 2");
  require(p.summary_first_horizon >= 1, prefix + "summary_first_horizon", "must be >= 1");
  require(p.summary_horizon_count >= 1 && p.summary_horizon_count <= 40, prefix + "summary_horizon_count",
          "must lie in [1, 40]");
  require(p.decay_k >= 0.0, prefix + "decay_k", "must be >= 0");
  require(p.decay_first_horizon >= 1, prefix + "decay_first_horizon", "must be >= 1");
  require(p.decay_horizon_count >= 2 && p.decay_horizon_count <= 40, prefix + "decay_horizon_count",
          "must lie in [2, 40]");
  require(p.control_k >= 0.0, prefix + "control_k", "must be >= 0");
}

void check(const SkewParams& p) {
  check(p.transition);
  require(!p.frequencies.empty() && p.frequencies.size() <= 6, "frequencies", "needs 1 to 6 entries");
  require(p.modulation.size() == p.frequencies.size(), "modulation", "needs one amplitude per frequency");
  double total = 0.0;
  for (double a : p.modulation) total += std::abs(a);
  require(total < 1.0, "modulation", "sum of |amplitudes| must be < 1");
  require(p.ulam_cells_per_axis >= 1 && p.ulam_cells_per_axis <= 16, "ulam_cells_per_axis", "must lie in [1, 16]");
  require(p.ulam_samples >= 1, "ulam_samples", "must be >= 1");
  require(p.ulam_k >= 0.0, "ulam_k", "must be >= 0");
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

const std::vector<std::string>& scenario_names() { return kScenarioNames; }

ExperimentConfig default_config(const std::string& scenario) {
  ExperimentConfig c;
  c.params = default_params(scenario);
  c.scenario = scenario;
  return c;
}

void validate(const ExperimentConfig& config) {
  const ScenarioParams expected = default_params(config.scenario);
  if (expected.index() != config.params.index()) {
    throw ConfigError("parameters", "parameters do not belong to scenario " + config.scenario);
  }
  if (config.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  std::visit([](const auto& p) { check(p); }, config.params);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source, const std::string& fallback_scenario) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column), "syntax error");
  }
  if (!root.is_object()) throw ConfigError(source, "top level must be an object");

  Reader top(root, "");
  std::int64_t version = kConfigVersion;
  top("config_version", version);
  if (version != kConfigVersion) {
    throw ConfigError("config_version", "unsupported version " + std::to_string(version) + " (expected " +
                                            std::to_string(kConfigVersion) + ")");
  }

  ExperimentConfig c;
  top("scenario", c.scenario);
  if (c.scenario.empty()) c.scenario = fallback_scenario;
  if (c.scenario.empty()) throw ConfigError("scenario", "missing scenario name");
  if (!fallback_scenario.empty() && c.scenario != fallback_scenario) {
    throw ConfigError("scenario", "config is for '" + c.scenario + "', not '" + fallback_scenario + "'");
  }
  c.params = default_params(c.scenario);
  top("seed", c.seed);
  top("output_dir", c.output_dir);
  top.object("parameters", [&](Reader& r) { std::visit([&](auto& p) { fields(r, p); }, c.params); });
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& fallback_scenario) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot read config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, fallback_scenario);
}

Json to_json(const ExperimentConfig& config) {
  Json j = Json::object();
  j["config_version"] = kConfigVersion;
  j["scenario"] = config.scenario;
  j["seed"] = config.seed;
  j["output_dir"] = config.output_dir;
  Json params = Json::object();
  Writer w(params);
  ScenarioParams copy = config.params;
  std::visit([&](auto& p) { fields(w, p); }, copy);
  j["parameters"] = std::move(params);
  return j;
}

std::string serialize_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ergostab
