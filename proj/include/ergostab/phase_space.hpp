#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ergostab {

inline constexpr std::size_t kMaxDim = 8;

enum class Axis : std::uint8_t { periodic, unbounded };

/// Topology signature of a phase space: one tag per coordinate. Periodic
/// coordinates live on [0,1); unbounded ones on the real line.
class PhaseSpace {
 public:
  PhaseSpace() = default;
  PhaseSpace(std::initializer_list<Axis> axes);
  explicit PhaseSpace(std::span<const Axis> axes);

  /// d-dimensional unit torus.
  static PhaseSpace torus(std::size_t dim);
  /// (p, q) with p unbounded and q periodic.
  static PhaseSpace cylinder();

  std::size_t dim() const noexcept { return dim_; }
  Axis axis(std::size_t i) const;
  bool periodic(std::size_t i) const { return axis(i) == Axis::periodic; }
  bool compact() const noexcept { return unbounded_mask_ == 0; }

  /// Same space with `extra` periodic angles appended.
  PhaseSpace with_angles(std::size_t extra) const;

  std::string describe() const;

  friend bool operator==(const PhaseSpace&, const PhaseSpace&) = default;

 private:
  std::uint8_t dim_ = 0;
  std::uint8_t unbounded_mask_ = 0;
};

using Coords = std::array<double, kMaxDim>;

/// x in M. Construction validates and wraps, so every periodic coordinate of
/// a PhasePoint lies in [0,1).
class PhasePoint {
 public:
  PhasePoint() = default;
  PhasePoint(const PhaseSpace& space, std::span<const double> coords);
  PhasePoint(const PhaseSpace& space, std::initializer_list<double> coords);

  /// Skips validation; `coords` must already be wrapped and finite.
  static PhasePoint unchecked(const PhaseSpace& space, const Coords& coords) noexcept {
    PhasePoint x;
    x.space_ = space;
    x.coords_ = coords;
    return x;
  }

  const PhaseSpace& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return space_.dim(); }
  double operator[](std::size_t i) const noexcept { return coords_[i]; }
  const Coords& raw() const noexcept { return coords_; }
  std::span<const double> coords() const noexcept { return {coords_.data(), dim()}; }

  friend bool operator==(const PhasePoint& a, const PhasePoint& b) {
    if (a.space_ != b.space_) return false;
    for (std::size_t i = 0; i < a.dim(); ++i) {
      if (a.coords_[i] != b.coords_[i]) return false;
    }
    return true;
  }

 private:
  PhaseSpace space_;
  Coords coords_{};
};

/// c - floor(c), forced into [0,1) when rounding produces 1.
inline double wrap_unit(double c) noexcept {
  double r = c - std::floor(c);
  return r >= 1.0 ? 0.0 : r;
}

/// Reduces every periodic coordinate mod 1. Throws InvalidInput on
/// non-finite input and DimensionMismatch when sizes disagree.
PhasePoint wrap(const PhaseSpace& space, std::span<const double> coords);
PhasePoint wrap(const PhasePoint& x);

/// Half-open interval [lo, hi). On a periodic axis lo > hi wraps through 0.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

class GridPartition;

struct BoxShape {
  std::vector<Interval> intervals;
};

/// Disk on the 2-torus, measured with the periodic (minimum image) metric.
struct DiskShape {
  std::array<double, 2> center{};
  double diameter = 0.0;
};

struct CellSetShape {
  std::vector<std::size_t> cells;  // sorted, unique, each < cell_count
};

/// A measurable set A with its characteristic function 1_A.
class Region {
 public:
  static Region box(const PhaseSpace& space, std::vector<Interval> intervals, std::string label = "box");
  static Region disk(std::array<double, 2> center, double diameter, std::string label = "disk");
  static Region cells(const GridPartition& partition, std::vector<std::size_t> ids, std::string label = "cells");
  /// Full periodic extent on every periodic axis, `window` on unbounded ones.
  static Region whole(const PhaseSpace& space, Interval window = {}, std::string label = "whole");

  const PhaseSpace& space() const noexcept { return space_; }
  const std::string& label() const noexcept { return label_; }
  const std::variant<BoxShape, DiskShape, CellSetShape>& shape() const noexcept { return shape_; }
  /// Partition backing a cell-set region; null for other shapes.
  const GridPartition* partition() const noexcept { return partition_.get(); }

  /// Lebesgue measure of the region.
  double volume() const;
  bool contains(const PhasePoint& x) const;

  std::string describe() const;

 /// Empty region of the 0-dimensional space; useful only as a placeholder.
  Region() = default;

 private:
  PhaseSpace space_;
  std::variant<BoxShape, DiskShape, CellSetShape> shape_;
  std::shared_ptr<const GridPartition> partition_;
  std::string label_;
};

/// 1_A(x) in {0, 1}. DimensionMismatch when the point's space differs.
int indicator(const Region& region, const PhasePoint& x);

/// Interval length, accounting for wrap on periodic axes.
double interval_width(const Interval& iv, Axis axis);

struct AxisGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t cells = 1;
};

inline constexpr Interval kDefaultCylinderWindow{-8.0 * std::numbers::pi, 8.0 * std::numbers::pi};

/// Regular product grid. Cells are numbered row-major with axis 0 fastest:
/// id = i0 + n0 * (i1 + n1 * (i2 + ...)). Points outside the window of an
/// unbounded axis map to the overflow id `cell_count()`.
class GridPartition {
 public:
  GridPartition(const PhaseSpace& space, std::vector<AxisGrid> axes);
  /// Periodic axes get [0,1); unbounded axes get `window`.
  static GridPartition uniform(const PhaseSpace& space, std::vector<std::size_t> cells_per_axis,
                               Interval window = kDefaultCylinderWindow);

  const PhaseSpace& space() const noexcept { return space_; }
  const std::vector<AxisGrid>& axes() const noexcept { return axes_; }
  std::size_t cell_count() const noexcept { return count_; }
  std::size_t overflow_index() const noexcept { return count_; }
  bool has_overflow() const noexcept { return !space_.compact(); }

  double cell_volume() const noexcept { return cell_volume_; }
  double window_volume() const noexcept { return window_volume_; }

  std::size_t cell_index(const PhasePoint& x) const;
  /// Per-axis [lo, hi) bounds of a cell.
  std::vector<Interval> cell_bounds(std::size_t id) const;
  PhasePoint cell_center(std::size_t id) const;

  std::string describe() const;

  friend bool operator==(const GridPartition& a, const GridPartition& b);

 private:
  PhaseSpace space_;
  std::vector<AxisGrid> axes_;
  std::size_t count_ = 0;
  double cell_volume_ = 0.0;
  double window_volume_ = 0.0;
};

enum class Sampler { pseudo_random, lattice };

/// Uniform initial density on a region: rho_0 = 1_S / mu(S).
struct EnsembleSpec {
  Region region;
  std::size_t count = 1;
  Sampler sampler = Sampler::pseudo_random;
  std::uint64_t seed = 0;
};

inline constexpr int kDiskMaxRetries = 64;

/// Deterministic ensemble. Pseudo-random point i depends only on (seed, i),
/// so ensembles are prefix-stable in `count`. The lattice sampler is a
/// Korobov rank-1 lattice with generator a = smallest integer >= round(n/phi)
/// coprime to n (z = (1, a, a^2, ...) mod n) plus a seeded random shift.
std::vector<PhasePoint> sample_ensemble(const EnsembleSpec& spec);

/// Single pseudo-random point of the stream; used by parallel callers.
PhasePoint sample_point(const Region& region, std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0,1) from a counter-based stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  double uniform() noexcept;

 private:
  std::mt19937_64 engine_;
};

}  // namespace ergostab
