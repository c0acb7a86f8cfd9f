#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ergostab/config.hpp"
#include "ergostab/curve.hpp"

namespace ergostab {

/// Outcome of one scenario assertion. `detail` states the measured value,
/// the assertion and its tolerance.
struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string scenario;
  ExperimentConfig config;
  ContinuityCurve rows;
  std::vector<Verdict> verdicts;
  /// Wall-clock seconds per phase; never written to CSV.
  std::vector<std::pair<std::string, double>> timings;

  bool passed() const;
  void check(std::string name, bool ok, std::string detail);
};

enum class OutputFormat { csv, json };

/// Header plus one line per row; values with 17 significant digits.
void write_csv(std::ostream& os, const Report& report);
/// {scenario, config_hash, config, seed, timings, verdicts, rows}.
void write_json(std::ostream& os, const Report& report);
/// gnuplot script plotting each quantity of the CSV against epsilon_index.
void write_plot_script(std::ostream& os, const Report& report);
/// Verdict lines for the terminal.
void write_summary(std::ostream& os, const Report& report);

/// Writes <scenario>.csv + <scenario>.plot (csv) or <scenario>.json (json),
/// plus <scenario>.config.json, into `dir`. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const Report& report, const std::filesystem::path& dir,
                                                 OutputFormat format);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace ergostab
