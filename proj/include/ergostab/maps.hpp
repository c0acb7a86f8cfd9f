#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergostab/phase_space.hpp"

namespace ergostab {

class MapDef;

/// (p, q) -> (p + alpha, q + beta) mod 1.
struct TorusRotation {
  double alpha = 0.0;
  double beta = 0.0;
  friend bool operator==(const TorusRotation&, const TorusRotation&) = default;
};

/// Chirikov map in unit-torus scaling:
///   p' = p + (K / 2pi) sin(2 pi q)  (mod 1),   q' = q + p'  (mod 1).
struct StandardMapTorus {
  double k = 0.0;
  friend bool operator==(const StandardMapTorus&, const StandardMapTorus&) = default;
};

/// Same update with p left on the real line.
struct StandardMapCylinder {
  double k = 0.0;
  friend bool operator==(const StandardMapCylinder&, const StandardMapCylinder&) = default;
};

/// Pure momentum kick p' = p + (A / 2pi) sin(2 pi q), q unchanged.
struct Kick {
  double amplitude = 0.0;
  bool cylinder = false;
  friend bool operator==(const Kick&, const Kick&) = default;
};

/// Autonomous extension on M x T^N. The base kick amplitude is multiplied by
/// 1 + sum_i a_i cos(2 pi phi_i) before phi_i advances by omega_i.
struct SkewProduct {
  std::shared_ptr<const MapDef> base;
  std::vector<double> frequencies;
  std::vector<double> modulation;
};

/// Applies `maps` left to right.
struct Composite {
  PhaseSpace space;
  std::vector<MapDef> maps;
};

/// A measure-preserving map T. Immutable; step/iterate are pure.
class MapDef {
 public:
  using Kind = std::variant<TorusRotation, StandardMapTorus, StandardMapCylinder, Kick, SkewProduct, Composite>;

  MapDef(TorusRotation m);
  MapDef(StandardMapTorus m);
  MapDef(StandardMapCylinder m);
  MapDef(Kick m);
  MapDef(SkewProduct m);
  MapDef(Composite m);

  static MapDef skew(const MapDef& base, std::vector<double> frequencies, std::vector<double> modulation);
  static MapDef compose(std::vector<MapDef> maps);

  const Kind& kind() const noexcept { return *kind_; }
  const PhaseSpace& space() const noexcept { return space_; }
  std::string describe() const;

  friend bool operator==(const MapDef& a, const MapDef& b);

 private:
  std::shared_ptr<const Kind> kind_;
  PhaseSpace space_;
};

/// One application of T. DimensionMismatch if x is not in T's phase space.
PhasePoint step(const MapDef& map, const PhasePoint& x);

/// T^{(k)}(x) by repeated `step`; k = 0 returns x.
PhasePoint iterate(const MapDef& map, const PhasePoint& x, std::uint64_t k);

/// T^{-1}. Every built-in kind is invertible.
PhasePoint inverse_step(const MapDef& map, const PhasePoint& x);

/// Calls visit(x_n, n) for the orbit x_n = T^{(n)}(x0), n = 0 .. count-1.
/// Uses the same step routine as `step`, so results agree bit-for-bit.
template <class Visit>
void for_each_orbit_point(const MapDef& map, const PhasePoint& x0, std::uint64_t count, Visit&& visit);

/// N/D in lowest terms approximating `target`.
struct RationalApproximant {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;
  double target = 0.0;

  double value() const noexcept { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  friend bool operator==(const RationalApproximant&, const RationalApproximant&) = default;
};

/// Continued-fraction convergents of target in (0,1) with 2 <= D <= max_denominator,
/// increasing in D. The trivial convergents 0/1 and 1/1 are omitted.
std::vector<RationalApproximant> convergents(double target, std::int64_t max_denominator);

/// A one-parameter family eps -> T_eps with T_0 = base.
class PerturbedFamily {
 public:
  using Schedule = std::function<MapDef(double)>;

  /// Throws InvalidInput when schedule(0) differs structurally from base.
  PerturbedFamily(std::string name, MapDef base, Schedule schedule);

  /// Throws DimensionMismatch if the schedule changes the phase space.
  MapDef at(double eps) const;
  const MapDef& base() const noexcept { return base_; }
  const std::string& name() const noexcept { return name_; }

  /// eps is a convergent index: 0 -> base, k >= 1 -> TorusRotation(N_k/D_k, beta).
  static PerturbedFamily rotation_approximants(double alpha, double beta, std::int64_t max_denominator);
  /// StandardMapTorus / StandardMapCylinder with K = K_base + eps.
  static PerturbedFamily k_sweep(const MapDef& standard_map);
  /// base followed by an extra Kick(eps); eps = 0 returns base itself.
  static PerturbedFamily amplitude_sweep(const MapDef& base);

 private:
  std::string name_;
  MapDef base_;
  Schedule schedule_;
};

// ---------------------------------------------------------------------------

namespace detail {

/// In-place single step with kick amplitudes scaled by `scale`.
void advance(const MapDef::Kind& kind, Coords& c, double scale);

/// DimensionMismatch unless x lives in the map's phase space.
void check_domain(const MapDef& map, const PhasePoint& x);

}  // namespace detail

template <class Visit>
void for_each_orbit_point(const MapDef& map, const PhasePoint& x0, std::uint64_t count, Visit&& visit) {
  detail::check_domain(map, x0);
  Coords c = x0.raw();
  const PhaseSpace& space = map.space();
  for (std::uint64_t n = 0; n < count; ++n) {
    visit(PhasePoint::unchecked(space, c), n);
    if (n + 1 < count) detail::advance(map.kind(), c, 1.0);
  }
}

}  // namespace ergostab
