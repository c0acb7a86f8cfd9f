#include "ergostab/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ergostab/errors.hpp"
#include "ergostab/numeric.hpp"

namespace ergostab {

// ---------------------------------------------------------------------------
// PhaseSpace

PhaseSpace::PhaseSpace(std::initializer_list<Axis> axes)
    : PhaseSpace(std::span<const Axis>(axes.begin(), axes.size())) {}

PhaseSpace::PhaseSpace(std::span<const Axis> axes) {
  if (axes.empty() || axes.size() > kMaxDim) {
    throw InvalidInput("phase space dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  dim_ = static_cast<std::uint8_t>(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] == Axis::unbounded) unbounded_mask_ |= static_cast<std::uint8_t>(1u << i);
  }
}

PhaseSpace PhaseSpace::torus(std::size_t dim) {
  std::vector<Axis> axes(dim, Axis::periodic);
  return PhaseSpace(std::span<const Axis>(axes));
}

PhaseSpace PhaseSpace::cylinder() { return PhaseSpace{Axis::unbounded, Axis::periodic}; }

Axis PhaseSpace::axis(std::size_t i) const {
  if (i >= dim_) throw DimensionMismatch("axis index " + std::to_string(i) + " out of range");
  return (unbounded_mask_ >> i) & 1u ? Axis::unbounded : Axis::periodic;
}

PhaseSpace PhaseSpace::with_angles(std::size_t extra) const {
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < dim_; ++i) axes.push_back(axis(i));
  axes.insert(axes.end(), extra, Axis::periodic);
  return PhaseSpace(std::span<const Axis>(axes));
}

std::string PhaseSpace::describe() const {
  std::string out;
  for (std::size_t i = 0; i < dim_; ++i) out += periodic(i) ? 'T' : 'R';
  return out;
}

// ---------------------------------------------------------------------------
// PhasePoint / wrap

PhasePoint wrap(const PhaseSpace& space, std::span<const double> coords) {
  if (coords.size() != space.dim()) {
    throw DimensionMismatch("point has " + std::to_string(coords.size()) + " coordinates, space " +
                            space.describe() + " needs " + std::to_string(space.dim()));
  }
  Coords c{};
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) {
      throw InvalidInput("non-finite coordinate at index " + std::to_string(i));
    }
    c[i] = space.periodic(i) ? wrap_unit(coords[i]) : coords[i];
  }
  return PhasePoint::unchecked(space, c);
}

PhasePoint wrap(const PhasePoint& x) { return wrap(x.space(), x.coords()); }

PhasePoint::PhasePoint(const PhaseSpace& space, std::span<const double> coords)
    : PhasePoint(wrap(space, coords)) {}

PhasePoint::PhasePoint(const PhaseSpace& space, std::initializer_list<double> coords)
    : PhasePoint(space, std::span<const double>(coords.begin(), coords.size())) {}

// ---------------------------------------------------------------------------
// Region

double interval_width(const Interval& iv, Axis axis) {
  if (axis == Axis::unbounded || iv.lo <= iv.hi) return iv.hi - iv.lo;
  return 1.0 - iv.lo + iv.hi;
}

namespace {

bool in_interval(double x, const Interval& iv, Axis axis) {
  if (axis == Axis::unbounded || iv.lo <= iv.hi) return iv.lo <= x && x < iv.hi;
  return x >= iv.lo || x < iv.hi;
}

double periodic_delta(double a, double b) {
  double d = a - b;
  d -= std::round(d);
  return d;
}

void check_space(const PhaseSpace& expected, const PhaseSpace& got) {
  if (expected != got) {
    throw DimensionMismatch("phase space " + got.describe() + " does not match " + expected.describe());
  }
}

}  // namespace

Region Region::box(const PhaseSpace& space, std::vector<Interval> intervals, std::string label) {
  if (intervals.size() != space.dim()) {
    throw DimensionMismatch("box needs one interval per axis of " + space.describe());
  }
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const Interval& iv = intervals[i];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw InvalidInput("non-finite box bound");
    if (space.periodic(i)) {
      if (iv.lo < 0.0 || iv.lo > 1.0 || iv.hi < 0.0 || iv.hi > 1.0) {
        throw InvalidInput("periodic box bounds must lie in [0,1] on axis " + std::to_string(i));
      }
    } else if (iv.hi < iv.lo) {
      throw InvalidInput("unbounded axis interval must satisfy lo <= hi on axis " + std::to_string(i));
    }
  }
  Region r;
  r.space_ = space;
  r.shape_ = BoxShape{std::move(intervals)};
  r.label_ = std::move(label);
  return r;
}

Region Region::disk(std::array<double, 2> center, double diameter, std::string label) {
  if (!std::isfinite(center[0]) || !std::isfinite(center[1]) || !std::isfinite(diameter)) {
    throw InvalidInput("non-finite disk parameters");
  }
  if (diameter < 0.0 || diameter > 1.0) throw InvalidInput("disk diameter must lie in [0,1]");
  Region r;
  r.space_ = PhaseSpace::torus(2);
  r.shape_ = DiskShape{{wrap_unit(center[0]), wrap_unit(center[1])}, diameter};
  r.label_ = std::move(label);
  return r;
}

Region Region::cells(const GridPartition& partition, std::vector<std::size_t> ids, std::string label) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (!ids.empty() && ids.back() >= partition.cell_count()) {
    throw InvalidInput("cell id " + std::to_string(ids.back()) + " out of range");
  }
  Region r;
  r.space_ = partition.space();
  r.shape_ = CellSetShape{std::move(ids)};
  r.partition_ = std::make_shared<const GridPartition>(partition);
  r.label_ = std::move(label);
  return r;
}

Region Region::whole(const PhaseSpace& space, Interval window, std::string label) {
  std::vector<Interval> iv(space.dim(), Interval{0.0, 1.0});
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (!space.periodic(i)) iv[i] = window;
  }
  return box(space, std::move(iv), std::move(label));
}

double Region::volume() const {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          double v = 1.0;
          for (std::size_t i = 0; i < s.intervals.size(); ++i) {
            v *= interval_width(s.intervals[i], space_.axis(i));
          }
          return v;
        } else if constexpr (std::is_same_v<S, DiskShape>) {
          return std::numbers::pi * s.diameter * s.diameter / 4.0;
        } else {
          return static_cast<double>(s.cells.size()) * partition_->cell_volume();
        }
      },
      shape_);
}

bool Region::contains(const PhasePoint& x) const {
  check_space(space_, x.space());
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          for (std::size_t i = 0; i < s.intervals.size(); ++i) {
            if (!in_interval(x[i], s.intervals[i], space_.axis(i))) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<S, DiskShape>) {
          const double dp = periodic_delta(x[0], s.center[0]);
          const double dq = periodic_delta(x[1], s.center[1]);
          const double r = 0.5 * s.diameter;
          return dp * dp + dq * dq < r * r;
        } else {
          const std::size_t id = partition_->cell_index(x);
          return std::binary_search(s.cells.begin(), s.cells.end(), id);
        }
      },
      shape_);
}

std::string Region::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << label_ << ':';
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          os << "box";
          for (const auto& iv : s.intervals) os << "[" << iv.lo << "," << iv.hi << ")";
        } else if constexpr (std::is_same_v<S, DiskShape>) {
          os << "disk(" << s.center[0] << "," << s.center[1] << ";d=" << s.diameter << ")";
        } else {
          os << "cells(" << s.cells.size() << " of " << partition_->describe() << ")";
        }
      },
      shape_);
  return os.str();
}

int indicator(const Region& region, const PhasePoint& x) { return region.contains(x) ? 1 : 0; }

// ---------------------------------------------------------------------------
// GridPartition

GridPartition::GridPartition(const PhaseSpace& space, std::vector<AxisGrid> axes)
    : space_(space), axes_(std::move(axes)) {
  if (axes_.size() != space_.dim()) throw DimensionMismatch("partition needs one axis grid per coordinate");
  count_ = 1;
  cell_volume_ = 1.0;
  window_volume_ = 1.0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const AxisGrid& a = axes_[i];
    if (a.cells == 0) throw InvalidInput("cells per axis must be positive");
    if (space_.periodic(i) && (a.lo != 0.0 || a.hi != 1.0)) {
      throw InvalidInput("periodic axis " + std::to_string(i) + " must use the window [0,1)");
    }
    if (!(a.hi > a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi)) {
      throw InvalidInput("axis window must be finite with lo < hi");
    }
    count_ *= a.cells;
    const double width = a.hi - a.lo;
    window_volume_ *= width;
    cell_volume_ *= width / static_cast<double>(a.cells);
  }
}

GridPartition GridPartition::uniform(const PhaseSpace& space, std::vector<std::size_t> cells_per_axis,
                                     Interval window) {
  if (cells_per_axis.size() != space.dim()) throw DimensionMismatch("cells_per_axis size mismatch");
  std::vector<AxisGrid> axes;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (space.periodic(i)) {
      axes.push_back({0.0, 1.0, cells_per_axis[i]});
    } else {
      axes.push_back({window.lo, window.hi, cells_per_axis[i]});
    }
  }
  return GridPartition(space, std::move(axes));
}

std::size_t GridPartition::cell_index(const PhasePoint& x) const {
  check_space(space_, x.space());
  std::size_t id = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const AxisGrid& a = axes_[i];
    const double t = (x[i] - a.lo) / (a.hi - a.lo);
    if (!(t >= 0.0) || t >= 1.0) return count_;
    const std::size_t k = std::min(static_cast<std::size_t>(t * static_cast<double>(a.cells)), a.cells - 1);
    id += k * stride;
    stride *= a.cells;
  }
  return id;
}

std::vector<Interval> GridPartition::cell_bounds(std::size_t id) const {
  if (id >= count_) throw InvalidInput("cell id out of range");
  std::vector<Interval> out;
  for (const AxisGrid& a : axes_) {
    const std::size_t k = id % a.cells;
    id /= a.cells;
    const double h = (a.hi - a.lo) / static_cast<double>(a.cells);
    out.push_back({a.lo + h * static_cast<double>(k), a.lo + h * static_cast<double>(k + 1)});
  }
  return out;
}

PhasePoint GridPartition::cell_center(std::size_t id) const {
  const auto bounds = cell_bounds(id);
  Coords c{};
  for (std::size_t i = 0; i < bounds.size(); ++i) c[i] = 0.5 * (bounds[i].lo + bounds[i].hi);
  return PhasePoint(space_, std::span<const double>(c.data(), bounds.size()));
}

std::string GridPartition::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (i) os << 'x';
    os << axes_[i].cells;
    if (!space_.periodic(i)) os << "[" << axes_[i].lo << "," << axes_[i].hi << ")";
  }
  return os.str();
}

bool operator==(const GridPartition& a, const GridPartition& b) {
  if (a.space_ != b.space_ || a.axes_.size() != b.axes_.size()) return false;
  for (std::size_t i = 0; i < a.axes_.size(); ++i) {
    if (a.axes_[i].lo != b.axes_[i].lo || a.axes_[i].hi != b.axes_[i].hi || a.axes_[i].cells != b.axes_[i].cells) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Sampling

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double CounterRng::uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

namespace {

constexpr std::uint64_t kShiftStream = ~std::uint64_t{0};

// Maps unit-cube coordinates u into the region. Disks use the area-preserving
// polar map; cell sets use u[0] to pick the cell, which needs dim+1 inputs.
PhasePoint place_in_box(const Region& region, const std::vector<Interval>& iv, std::span<const double> u) {
  const PhaseSpace& space = region.space();
  Coords c{};
  for (std::size_t i = 0; i < iv.size(); ++i) {
    const double width = interval_width(iv[i], space.axis(i));
    double v = iv[i].lo + u[i] * width;
    if (space.periodic(i)) v = wrap_unit(v);
    // rounding can land exactly on the open end
    if (!in_interval(v, iv[i], space.axis(i))) v = space.periodic(i) ? wrap_unit(iv[i].lo) : iv[i].lo;
    c[i] = v;
  }
  return PhasePoint::unchecked(space, c);
}

PhasePoint place_on_disk(const DiskShape& d, double u, double v) {
  const double r = 0.5 * d.diameter * std::sqrt(u);
  const double theta = kTwoPi * v;
  Coords c{};
  c[0] = wrap_unit(d.center[0] + r * std::cos(theta));
  c[1] = wrap_unit(d.center[1] + r * std::sin(theta));
  return PhasePoint::unchecked(PhaseSpace::torus(2), c);
}

void require_positive_volume(const Region& region) {
  if (!(region.volume() > 0.0)) {
    throw InvalidInput("cannot sample from zero-volume region '" + region.label() + "'");
  }
}

}  // namespace

PhasePoint sample_point(const Region& region, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, index);
  return std::visit(
      [&](const auto& s) -> PhasePoint {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxShape>) {
          std::array<double, kMaxDim> u{};
          for (std::size_t i = 0; i < s.intervals.size(); ++i) u[i] = rng.uniform();
          return place_in_box(region, s.intervals, std::span<const double>(u.data(), s.intervals.size()));
        } else if constexpr (std::is_same_v<S, DiskShape>) {
          const double r = 0.5 * s.diameter;
          for (int attempt = 0; attempt < kDiskMaxRetries; ++attempt) {
            const double dx = (2.0 * rng.uniform() - 1.0) * r;
            const double dy = (2.0 * rng.uniform() - 1.0) * r;
            if (dx * dx + dy * dy < r * r) {
              Coords c{};
              c[0] = wrap_unit(s.center[0] + dx);
              c[1] = wrap_unit(s.center[1] + dy);
              return PhasePoint::unchecked(PhaseSpace::torus(2), c);
            }
          }
          throw NumericError("disk rejection sampling exceeded " + std::to_string(kDiskMaxRetries) +
                             " retries at point " + std::to_string(index));
        } else {
          const GridPartition& part = *region.partition();
          const auto k = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(s.cells.size())),
                                  s.cells.size() - 1);
          const auto bounds = part.cell_bounds(s.cells[k]);
          std::array<double, kMaxDim> u{};
          for (std::size_t i = 0; i < bounds.size(); ++i) u[i] = rng.uniform();
          return place_in_box(region, bounds, std::span<const double>(u.data(), bounds.size()));
        }
      },
      region.shape());
}

namespace {

__extension__ using Wide = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<Wide>(a) * b) % n);
}

std::uint64_t korobov_generator(std::uint64_t n) {
  const double inv_phi = 0.6180339887498949;
  auto a = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * inv_phi));
  a = std::max<std::uint64_t>(a, 1);
  while (std::gcd(a, n) != 1) ++a;
  return a;
}

std::vector<PhasePoint> lattice_ensemble(const EnsembleSpec& spec) {
  const Region& region = spec.region;
  if (std::holds_alternative<CellSetShape>(region.shape())) {
    throw InvalidInput("lattice sampling is not supported on cell-set regions");
  }
  const std::size_t dim = std::holds_alternative<DiskShape>(region.shape()) ? 2 : region.space().dim();
  const std::uint64_t n = spec.count;
  const std::uint64_t a = korobov_generator(n);
  std::vector<std::uint64_t> z(dim, 1);
  for (std::size_t j = 1; j < dim; ++j) z[j] = mul_mod(z[j - 1], a, n);
  CounterRng shift_rng(spec.seed, kShiftStream);
  std::vector<double> shift(dim);
  for (auto& s : shift) s = shift_rng.uniform();

  std::vector<PhasePoint> out;
  out.reserve(n);
  std::array<double, kMaxDim> u{};
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const std::uint64_t k = mul_mod(i, z[j], n);
      u[j] = wrap_unit(static_cast<double>(k) / static_cast<double>(n) + shift[j]);
    }
    if (const auto* d = std::get_if<DiskShape>(&region.shape())) {
      out.push_back(place_on_disk(*d, u[0], u[1]));
    } else {
      out.push_back(place_in_box(region, std::get<BoxShape>(region.shape()).intervals,
                                 std::span<const double>(u.data(), dim)));
    }
  }
  return out;
}

}  // namespace

std::vector<PhasePoint> sample_ensemble(const EnsembleSpec& spec) {
  if (spec.count == 0) throw InvalidInput("ensemble count must be positive");
  require_positive_volume(spec.region);
  if (spec.sampler == Sampler::lattice) return lattice_ensemble(spec);
  std::vector<PhasePoint> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(sample_point(spec.region, spec.seed, i));
  return out;
}

}  // namespace ergostab
