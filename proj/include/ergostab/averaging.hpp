#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ergostab/curve.hpp"
#include "ergostab/maps.hpp"
#include "ergostab/observable.hpp"
#include "ergostab/parallel.hpp"
#include "ergostab/phase_space.hpp"

namespace ergostab {

/// Ensemble estimate of a time average. The standard error reflects only the
/// spread between trajectories, not autocorrelation along a trajectory.
struct AverageResult {
  Complex value;
  std::uint64_t horizon = 0;
  std::size_t ensemble = 0;
  double standard_error = 0.0;
  std::map<std::string, std::string> metadata;

  double real() const noexcept { return value.real(); }
};

/// (1/N) sum_{n<N} psi(T^n x0), compensated. NumericError names the step at
/// which psi became non-finite.
Complex birkhoff_average(const MapDef& map, const Observable& psi, const PhasePoint& x0, std::uint64_t n);

/// Birkhoff averages of several observables along one trajectory.
std::vector<Complex> birkhoff_averages(const MapDef& map, std::span<const Observable> psis, const PhasePoint& x0,
                                       std::uint64_t n);

/// Birkhoff average of psi from every point of `starts`; entry i belongs to starts[i].
std::vector<Complex> birkhoff_samples(const MapDef& map, const Observable& psi, std::span<const PhasePoint> starts,
                                      std::uint64_t n, Parallelism par = {});

/// Mean and standard error (sample std / sqrt(count)) of per-trajectory
/// values, reduced in a fixed pairwise order.
AverageResult summarize(std::span<const Complex> samples, std::uint64_t horizon);

/// Ensemble mean of Birkhoff averages from the source ensemble: the finite-N
/// estimate of <phi|P(T) psi> with phi = 1_S / mu(S).
AverageResult itea(const MapDef& map, const EnsembleSpec& source, const Observable& psi, std::uint64_t n,
                   Parallelism par = {});

/// itea for several observables from the same trajectories.
std::vector<AverageResult> itea_many(const MapDef& map, const EnsembleSpec& source, std::span<const Observable> psis,
                                     std::uint64_t n, Parallelism par = {});

/// Ensemble mean of conj(phi(x0)) * B_N psi(x0): with a uniform ensemble on
/// the whole space this estimates <phi|P(T) psi>.
AverageResult weighted_itea(const MapDef& map, const EnsembleSpec& ensemble, const Observable& phi,
                            const Observable& psi, std::uint64_t n, Parallelism par = {});

/// itea with psi = 1_detector.
AverageResult visit_fraction(const MapDef& map, const EnsembleSpec& source, const Region& detector, std::uint64_t n,
                             Parallelism par = {});

struct CoverageResult {
  std::uint64_t horizon = 0;
  /// visited cells / cell_count: the estimate of mu(v(T,S)) on the window.
  double fraction = 0.0;
  std::size_t visited_cells = 0;
  /// Orbit points that fell in the overflow cell, summed over the ensemble.
  std::uint64_t overflow_visits = 0;
};

/// Fraction of partition cells visited by any ensemble orbit within N steps
/// (orbit points n = 0 .. N-1).
CoverageResult coverage(const MapDef& map, const EnsembleSpec& source, const GridPartition& partition, std::uint64_t n,
                        Parallelism par = {});

/// coverage at every horizon of an increasing schedule from one pass.
std::vector<CoverageResult> coverage_curve(const MapDef& map, const EnsembleSpec& source,
                                           const GridPartition& partition, std::span<const std::uint64_t> horizons,
                                           Parallelism par = {});

/// Running Cesaro mean of 1_trap at each horizon, averaged over the source
/// ensemble. Requires a map with an unbounded axis and strictly increasing
/// horizons. Rows are keyed by `label` and the horizon.
ContinuityCurve occupancy_decay(const MapDef& map, const EnsembleSpec& source, const Region& trap,
                                std::span<const std::uint64_t> horizons, Parallelism par = {},
                                const std::string& label = "occupancy");

/// value ~ prefactor * N^exponent by least squares in log-log space.
struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
};

/// Needs at least two points with positive horizons and values.
PowerLawFit fit_power_law(std::span<const std::uint64_t> horizons, std::span<const double> values);

/// table[i][j] = B_N psi_j (starts[i]); one trajectory per start.
std::vector<std::vector<Complex>> birkhoff_table(const MapDef& map, std::span<const Observable> psis,
                                                 std::span<const PhasePoint> starts, std::uint64_t n,
                                                 Parallelism par = {});

/// Trajectory estimate of max_j |<phi_j|(P_eps - P) psi_j>| from Birkhoff
/// tables of the perturbed and unperturbed maps (column j belongs to
/// probes[j].psi) over a uniform ensemble: the mean over starts of
/// conj(phi_j(x)) (B^eps_N psi_j(x) - B_N psi_j(x)). The standard error is that
/// of the maximizing pair.
AverageResult eta_trajectory(const std::vector<ProbePair>& probes, std::span<const PhasePoint> starts,
                             const std::vector<std::vector<Complex>>& perturbed,
                             const std::vector<std::vector<Complex>>& base);

/// N0, 2 N0, 4 N0, ... (count entries).
std::vector<std::uint64_t> geometric_horizons(std::uint64_t first, std::size_t count);

}  // namespace ergostab
