#include "ergostab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergostab/errors.hpp"
#include "ergostab/numeric.hpp"

namespace ergostab {

namespace {

constexpr std::size_t kCoverageBlocks = 16;

void check_horizon(std::uint64_t n) {
  if (n == 0) throw InvalidInput("horizon N must be >= 1");
}

void check_schedule(std::span<const std::uint64_t> horizons) {
  if (horizons.empty()) throw InvalidInput("horizon schedule is empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    check_horizon(horizons[i]);
    if (i > 0 && horizons[i] <= horizons[i - 1]) throw InvalidInput("horizons must be strictly increasing");
  }
}

void check_finite(const Complex& v, std::uint64_t step) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw NumericError("observable is not finite at step " + std::to_string(step));
  }
}

std::map<std::string, std::string> describe_run(const MapDef& map, const EnsembleSpec& source) {
  return {{"map", map.describe()},
          {"source", source.region.describe()},
          {"sampler", source.sampler == Sampler::lattice ? "lattice" : "pseudo_random"},
          {"seed", std::to_string(source.seed)}};
}

}  // namespace

Complex birkhoff_average(const MapDef& map, const Observable& psi, const PhasePoint& x0, std::uint64_t n) {
  check_horizon(n);
  CompensatedComplexSum acc;
  for_each_orbit_point(map, x0, n, [&](const PhasePoint& x, std::uint64_t k) {
    const Complex v = psi(x);
    check_finite(v, k);
    acc.add(v);
  });
  return acc.value() / static_cast<double>(n);
}

std::vector<Complex> birkhoff_averages(const MapDef& map, std::span<const Observable> psis, const PhasePoint& x0,
                                       std::uint64_t n) {
  check_horizon(n);
  std::vector<CompensatedComplexSum> acc(psis.size());
  for_each_orbit_point(map, x0, n, [&](const PhasePoint& x, std::uint64_t k) {
    for (std::size_t j = 0; j < psis.size(); ++j) {
      const Complex v = psis[j](x);
      check_finite(v, k);
      acc[j].add(v);
    }
  });
  std::vector<Complex> out;
  out.reserve(psis.size());
  for (const auto& a : acc) out.push_back(a.value() / static_cast<double>(n));
  return out;
}

std::vector<Complex> birkhoff_samples(const MapDef& map, const Observable& psi, std::span<const PhasePoint> starts,
                                      std::uint64_t n, Parallelism par) {
  check_horizon(n);
  std::vector<Complex> out(starts.size());
  parallel_for(starts.size(), par, [&](std::size_t i) { out[i] = birkhoff_average(map, psi, starts[i], n); });
  return out;
}

AverageResult summarize(std::span<const Complex> samples, std::uint64_t horizon) {
  if (samples.empty()) throw InvalidInput("cannot summarize an empty ensemble");
  AverageResult r;
  r.horizon = horizon;
  r.ensemble = samples.size();
  const double count = static_cast<double>(samples.size());
  r.value = pairwise_sum(samples) / count;
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = std::norm(samples[i] - r.value);
    const double var = pairwise_sum(std::span<const double>(sq)) / (count - 1.0);
    r.standard_error = std::sqrt(var / count);
  }
  if (!std::isfinite(r.value.real()) || !std::isfinite(r.value.imag())) throw NumericError("ensemble mean is not finite");
  return r;
}

AverageResult itea(const MapDef& map, const EnsembleSpec& source, const Observable& psi, std::uint64_t n,
                   Parallelism par) {
  const std::vector<PhasePoint> starts = sample_ensemble(source);
  AverageResult r = summarize(birkhoff_samples(map, psi, starts, n, par), n);
  r.metadata = describe_run(map, source);
  r.metadata["observable"] = psi.describe();
  return r;
}

std::vector<AverageResult> itea_many(const MapDef& map, const EnsembleSpec& source, std::span<const Observable> psis,
                                     std::uint64_t n, Parallelism par) {
  check_horizon(n);
  const std::vector<PhasePoint> starts = sample_ensemble(source);
  std::vector<std::vector<Complex>> per_start(starts.size());
  parallel_for(starts.size(), par, [&](std::size_t i) { per_start[i] = birkhoff_averages(map, psis, starts[i], n); });
  std::vector<AverageResult> out;
  out.reserve(psis.size());
  std::vector<Complex> column(starts.size());
  for (std::size_t j = 0; j < psis.size(); ++j) {
    for (std::size_t i = 0; i < starts.size(); ++i) column[i] = per_start[i][j];
    AverageResult r = summarize(column, n);
    r.metadata = describe_run(map, source);
    r.metadata["observable"] = psis[j].describe();
    out.push_back(std::move(r));
  }
  return out;
}

AverageResult weighted_itea(const MapDef& map, const EnsembleSpec& ensemble, const Observable& phi,
                            const Observable& psi, std::uint64_t n, Parallelism par) {
  const std::vector<PhasePoint> starts = sample_ensemble(ensemble);
  std::vector<Complex> samples = birkhoff_samples(map, psi, starts, n, par);
  for (std::size_t i = 0; i < starts.size(); ++i) samples[i] *= std::conj(phi(starts[i]));
  AverageResult r = summarize(samples, n);
  r.metadata = describe_run(map, ensemble);
  r.metadata["phi"] = phi.describe();
  r.metadata["observable"] = psi.describe();
  return r;
}

AverageResult visit_fraction(const MapDef& map, const EnsembleSpec& source, const Region& detector, std::uint64_t n,
                             Parallelism par) {
  AverageResult r = itea(map, source, Observable::indicator(detector), n, par);
  r.metadata["detector"] = detector.describe();
  return r;
}

CoverageResult coverage(const MapDef& map, const EnsembleSpec& source, const GridPartition& partition, std::uint64_t n,
                        Parallelism par) {
  const std::uint64_t h[] = {n};
  return coverage_curve(map, source, partition, h, par).front();
}

std::vector<CoverageResult> coverage_curve(const MapDef& map, const EnsembleSpec& source,
                                           const GridPartition& partition, std::span<const std::uint64_t> horizons,
                                           Parallelism par) {
  check_schedule(horizons);
  if (partition.space() != map.space()) throw DimensionMismatch("partition and map live on different spaces");
  const std::vector<PhasePoint> starts = sample_ensemble(source);
  const std::size_t cells = partition.cell_count();
  const std::uint64_t last = horizons.back();
  constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

  // Cell first-visit times and overflow counts per fixed block of members;
  // min and + are order independent, so any worker count gives the same result.
  const std::size_t blocks = std::min(kCoverageBlocks, starts.size());
  std::vector<std::vector<std::uint64_t>> first(blocks);
  std::vector<std::vector<std::uint64_t>> overflow(blocks);
  parallel_for(blocks, par, [&](std::size_t b) {
    std::vector<std::uint64_t> fv(cells, kNever);
    std::vector<std::uint64_t> of(horizons.size(), 0);
    const std::size_t begin = starts.size() * b / blocks;
    const std::size_t end = starts.size() * (b + 1) / blocks;
    for (std::size_t i = begin; i < end; ++i) {
      std::uint64_t outside = 0;
      std::size_t k = 0;
      for_each_orbit_point(map, starts[i], last, [&](const PhasePoint& x, std::uint64_t step) {
        while (k < horizons.size() && step == horizons[k]) of[k++] += outside;
        const std::size_t id = partition.cell_index(x);
        if (id >= cells) {
          ++outside;
        } else if (step < fv[id]) {
          fv[id] = step;
        }
      });
      while (k < horizons.size()) of[k++] += outside;
    }
    first[b] = std::move(fv);
    overflow[b] = std::move(of);
  });

  std::vector<std::uint64_t> fv(cells, kNever);
  for (const auto& block : first) {
    for (std::size_t c = 0; c < cells; ++c) fv[c] = std::min(fv[c], block[c]);
  }
  std::vector<CoverageResult> out(horizons.size());
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    CoverageResult& r = out[k];
    r.horizon = horizons[k];
    r.visited_cells = static_cast<std::size_t>(
        std::count_if(fv.begin(), fv.end(), [&](std::uint64_t t) { return t < horizons[k]; }));
    r.fraction = static_cast<double>(r.visited_cells) / static_cast<double>(cells);
    for (const auto& block : overflow) r.overflow_visits += block[k];
  }
  return out;
}

ContinuityCurve occupancy_decay(const MapDef& map, const EnsembleSpec& source, const Region& trap,
                                std::span<const std::uint64_t> horizons, Parallelism par, const std::string& label) {
  check_schedule(horizons);
  if (map.space().compact()) throw InvalidInput("occupancy decay needs a map with an unbounded axis");
  if (trap.space() != map.space()) throw DimensionMismatch("trap and map live on different spaces");
  const std::vector<PhasePoint> starts = sample_ensemble(source);
  const std::uint64_t last = horizons.back();
  std::vector<std::vector<double>> per_start(starts.size());
  parallel_for(starts.size(), par, [&](std::size_t i) {
    std::vector<double> frac(horizons.size());
    std::uint64_t inside = 0;
    std::size_t k = 0;
    for_each_orbit_point(map, starts[i], last, [&](const PhasePoint& x, std::uint64_t step) {
      while (k < horizons.size() && step == horizons[k]) {
        frac[k] = static_cast<double>(inside) / static_cast<double>(horizons[k]);
        ++k;
      }
      if (trap.contains(x)) ++inside;
    });
    while (k < horizons.size()) {
      frac[k] = static_cast<double>(inside) / static_cast<double>(horizons[k]);
      ++k;
    }
    per_start[i] = std::move(frac);
  });

  ContinuityCurve curve(label);
  std::vector<Complex> column(starts.size());
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    for (std::size_t i = 0; i < starts.size(); ++i) column[i] = per_start[i][k];
    const AverageResult r = summarize(column, horizons[k]);
    curve.add(CurveRow{0, label, horizons[k], r.value.real(), r.standard_error, ""});
  }
  return curve;
}

std::vector<std::vector<Complex>> birkhoff_table(const MapDef& map, std::span<const Observable> psis,
                                                 std::span<const PhasePoint> starts, std::uint64_t n,
                                                 Parallelism par) {
  check_horizon(n);
  std::vector<std::vector<Complex>> table(starts.size());
  parallel_for(starts.size(), par, [&](std::size_t i) { table[i] = birkhoff_averages(map, psis, starts[i], n); });
  return table;
}

AverageResult eta_trajectory(const std::vector<ProbePair>& probes, std::span<const PhasePoint> starts,
                             const std::vector<std::vector<Complex>>& perturbed,
                             const std::vector<std::vector<Complex>>& base) {
  if (probes.empty()) throw InvalidInput("eta needs at least one probe pair");
  if (perturbed.size() != starts.size() || base.size() != starts.size()) {
    throw DimensionMismatch("Birkhoff tables do not match the ensemble");
  }
  AverageResult best;
  double best_abs = -1.0;
  std::vector<Complex> samples(starts.size());
  for (std::size_t j = 0; j < probes.size(); ++j) {
    for (std::size_t i = 0; i < starts.size(); ++i) {
      if (perturbed[i].size() != probes.size() || base[i].size() != probes.size()) {
        throw DimensionMismatch("Birkhoff tables do not match the probe set");
      }
      samples[i] = std::conj(probes[j].phi(starts[i])) * (perturbed[i][j] - base[i][j]);
    }
    AverageResult r = summarize(samples, 0);
    if (std::abs(r.value) > best_abs) {
      best_abs = std::abs(r.value);
      best = std::move(r);
      best.metadata["pair"] = std::to_string(j);
    }
  }
  best.value = best_abs;
  return best;
}

PowerLawFit fit_power_law(std::span<const std::uint64_t> horizons, std::span<const double> values) {
  if (horizons.size() != values.size()) throw DimensionMismatch("horizons and values differ in length");
  if (horizons.size() < 2) throw InvalidInput("power-law fit needs at least two points");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] == 0 || !(values[i] > 0.0)) throw DomainError("power-law fit needs positive horizons and values");
    xs.push_back(std::log(static_cast<double>(horizons[i])));
    ys.push_back(std::log(values[i]));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DomainError("power-law fit needs distinct horizons");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<std::uint64_t> geometric_horizons(std::uint64_t first, std::size_t count) {
  check_horizon(first);
  std::vector<std::uint64_t> out;
  out.reserve(count);
  std::uint64_t h = first;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(h);
    if (i + 1 < count && h > std::numeric_limits<std::uint64_t>::max() / 2) throw InvalidInput("horizon overflow");
    h *= 2;
  }
  return out;
}

}  // namespace ergostab
