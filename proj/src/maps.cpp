#include "ergostab/maps.hpp"

#include <cmath>
#include <sstream>

#include "ergostab/errors.hpp"
#include "ergostab/numeric.hpp"

namespace ergostab {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidInput(std::string("non-finite map parameter: ") + what);
}

PhaseSpace space_of(const MapDef::Kind& kind) {
  return std::visit(
      [](const auto& m) -> PhaseSpace {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TorusRotation> || std::is_same_v<M, StandardMapTorus>) {
          return PhaseSpace::torus(2);
        } else if constexpr (std::is_same_v<M, StandardMapCylinder>) {
          return PhaseSpace::cylinder();
        } else if constexpr (std::is_same_v<M, Kick>) {
          return m.cylinder ? PhaseSpace::cylinder() : PhaseSpace::torus(2);
        } else if constexpr (std::is_same_v<M, SkewProduct>) {
          return m.base->space().with_angles(m.frequencies.size());
        } else {
          return m.space;
        }
      },
      kind);
}

inline double kick(double k, double q) { return k / kTwoPi * std::sin(kTwoPi * q); }

}  // namespace

MapDef::MapDef(TorusRotation m) {
  require_finite(m.alpha, "alpha");
  require_finite(m.beta, "beta");
  kind_ = std::make_shared<const Kind>(m);
  space_ = space_of(*kind_);
}

MapDef::MapDef(StandardMapTorus m) {
  require_finite(m.k, "K");
  kind_ = std::make_shared<const Kind>(m);
  space_ = space_of(*kind_);
}

MapDef::MapDef(StandardMapCylinder m) {
  require_finite(m.k, "K");
  kind_ = std::make_shared<const Kind>(m);
  space_ = space_of(*kind_);
}

MapDef::MapDef(Kick m) {
  require_finite(m.amplitude, "amplitude");
  kind_ = std::make_shared<const Kind>(m);
  space_ = space_of(*kind_);
}

MapDef::MapDef(SkewProduct m) {
  if (!m.base) throw InvalidInput("skew product needs a base map");
  if (m.base->space().dim() != 2) throw DimensionMismatch("skew product base must act on (p, q)");
  if (m.frequencies.empty()) throw InvalidInput("skew product needs at least one frequency");
  if (m.modulation.size() != m.frequencies.size()) {
    throw InvalidInput("skew product needs one modulation coefficient per frequency");
  }
  if (2 + m.frequencies.size() > kMaxDim) throw InvalidInput("too many skew-product angles");
  for (double w : m.frequencies) require_finite(w, "frequency");
  for (double a : m.modulation) require_finite(a, "modulation");
  kind_ = std::make_shared<const Kind>(std::move(m));
  space_ = space_of(*kind_);
}

MapDef::MapDef(Composite m) {
  for (const MapDef& inner : m.maps) {
    if (inner.space() != m.space) {
      throw DimensionMismatch("composite member acts on " + inner.space().describe() + ", expected " +
                              m.space.describe());
    }
  }
  if (m.space.dim() == 0) throw InvalidInput("composite needs a phase space");
  kind_ = std::make_shared<const Kind>(std::move(m));
  space_ = space_of(*kind_);
}

MapDef MapDef::skew(const MapDef& base, std::vector<double> frequencies, std::vector<double> modulation) {
  return MapDef(SkewProduct{std::make_shared<const MapDef>(base), std::move(frequencies), std::move(modulation)});
}

MapDef MapDef::compose(std::vector<MapDef> maps) {
  if (maps.empty()) throw InvalidInput("compose needs at least one map");
  PhaseSpace space = maps.front().space();
  return MapDef(Composite{space, std::move(maps)});
}

std::string MapDef::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TorusRotation>) {
          os << "torus_rotation(alpha=" << m.alpha << ",beta=" << m.beta << ")";
        } else if constexpr (std::is_same_v<M, StandardMapTorus>) {
          os << "standard_map_torus(K=" << m.k << ")";
        } else if constexpr (std::is_same_v<M, StandardMapCylinder>) {
          os << "standard_map_cylinder(K=" << m.k << ")";
        } else if constexpr (std::is_same_v<M, Kick>) {
          os << "kick(A=" << m.amplitude << (m.cylinder ? ",cylinder" : ",torus") << ")";
        } else if constexpr (std::is_same_v<M, SkewProduct>) {
          os << "skew_product(" << m.base->describe() << ";omega=";
          for (std::size_t i = 0; i < m.frequencies.size(); ++i) os << (i ? "," : "") << m.frequencies[i];
          os << ";a=";
          for (std::size_t i = 0; i < m.modulation.size(); ++i) os << (i ? "," : "") << m.modulation[i];
          os << ")";
        } else {
          os << "composite(";
          for (std::size_t i = 0; i < m.maps.size(); ++i) os << (i ? ";" : "") << m.maps[i].describe();
          os << ")";
        }
      },
      kind());
  return os.str();
}

bool operator==(const MapDef& a, const MapDef& b) {
  if (a.kind_ == b.kind_) return true;
  if (a.kind().index() != b.kind().index()) return false;
  return std::visit(
      [&](const auto& ma) -> bool {
        using M = std::decay_t<decltype(ma)>;
        const auto& mb = std::get<M>(b.kind());
        if constexpr (std::is_same_v<M, SkewProduct>) {
          return *ma.base == *mb.base && ma.frequencies == mb.frequencies && ma.modulation == mb.modulation;
        } else if constexpr (std::is_same_v<M, Composite>) {
          return ma.space == mb.space && ma.maps == mb.maps;
        } else {
          return ma == mb;
        }
      },
      a.kind());
}

// ---------------------------------------------------------------------------
// Stepping

namespace detail {

void advance(const MapDef::Kind& kind, Coords& c, double scale) {
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TorusRotation>) {
          c[0] = wrap_unit(c[0] + m.alpha);
          c[1] = wrap_unit(c[1] + m.beta);
        } else if constexpr (std::is_same_v<M, StandardMapTorus>) {
          c[0] = wrap_unit(c[0] + kick(scale * m.k, c[1]));
          c[1] = wrap_unit(c[1] + c[0]);
        } else if constexpr (std::is_same_v<M, StandardMapCylinder>) {
          c[0] = c[0] + kick(scale * m.k, c[1]);
          c[1] = wrap_unit(c[1] + c[0]);
        } else if constexpr (std::is_same_v<M, Kick>) {
          c[0] = c[0] + kick(scale * m.amplitude, c[1]);
          if (!m.cylinder) c[0] = wrap_unit(c[0]);
        } else if constexpr (std::is_same_v<M, SkewProduct>) {
          double factor = 1.0;
          for (std::size_t i = 0; i < m.modulation.size(); ++i) {
            if (m.modulation[i] != 0.0) factor += m.modulation[i] * std::cos(kTwoPi * c[2 + i]);
          }
          advance(m.base->kind(), c, scale * factor);
          for (std::size_t i = 0; i < m.frequencies.size(); ++i) c[2 + i] = wrap_unit(c[2 + i] + m.frequencies[i]);
        } else {
          for (const MapDef& inner : m.maps) advance(inner.kind(), c, scale);
        }
      },
      kind);
}

namespace {

void retreat(const MapDef::Kind& kind, Coords& c, double scale) {
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TorusRotation>) {
          c[0] = wrap_unit(c[0] - m.alpha);
          c[1] = wrap_unit(c[1] - m.beta);
        } else if constexpr (std::is_same_v<M, StandardMapTorus>) {
          c[1] = wrap_unit(c[1] - c[0]);
          c[0] = wrap_unit(c[0] - kick(scale * m.k, c[1]));
        } else if constexpr (std::is_same_v<M, StandardMapCylinder>) {
          c[1] = wrap_unit(c[1] - c[0]);
          c[0] = c[0] - kick(scale * m.k, c[1]);
        } else if constexpr (std::is_same_v<M, Kick>) {
          c[0] = c[0] - kick(scale * m.amplitude, c[1]);
          if (!m.cylinder) c[0] = wrap_unit(c[0]);
        } else if constexpr (std::is_same_v<M, SkewProduct>) {
          for (std::size_t i = 0; i < m.frequencies.size(); ++i) c[2 + i] = wrap_unit(c[2 + i] - m.frequencies[i]);
          double factor = 1.0;
          for (std::size_t i = 0; i < m.modulation.size(); ++i) {
            if (m.modulation[i] != 0.0) factor += m.modulation[i] * std::cos(kTwoPi * c[2 + i]);
          }
          retreat(m.base->kind(), c, scale * factor);
        } else {
          for (auto it = m.maps.rbegin(); it != m.maps.rend(); ++it) retreat(it->kind(), c, scale);
        }
      },
      kind);
}

}  // namespace
}  // namespace detail

void detail::check_domain(const MapDef& map, const PhasePoint& x) {
  if (x.space() != map.space()) {
    throw DimensionMismatch("point in " + x.space().describe() + " but " + map.describe() + " acts on " +
                            map.space().describe());
  }
}

using detail::check_domain;

PhasePoint step(const MapDef& map, const PhasePoint& x) {
  check_domain(map, x);
  Coords c = x.raw();
  detail::advance(map.kind(), c, 1.0);
  return PhasePoint::unchecked(map.space(), c);
}

PhasePoint iterate(const MapDef& map, const PhasePoint& x, std::uint64_t k) {
  check_domain(map, x);
  Coords c = x.raw();
  for (std::uint64_t i = 0; i < k; ++i) detail::advance(map.kind(), c, 1.0);
  return PhasePoint::unchecked(map.space(), c);
}

PhasePoint inverse_step(const MapDef& map, const PhasePoint& x) {
  check_domain(map, x);
  Coords c = x.raw();
  detail::retreat(map.kind(), c, 1.0);
  return PhasePoint::unchecked(map.space(), c);
}

// ---------------------------------------------------------------------------
// Continued fractions

std::vector<RationalApproximant> convergents(double target, std::int64_t max_denominator) {
  if (!std::isfinite(target)) throw InvalidInput("convergents: non-finite target");
  if (!(target > 0.0 && target < 1.0)) throw InvalidInput("convergents: target must lie in (0,1)");
  if (max_denominator < 1) throw InvalidInput("convergents: max_denominator must be >= 1");

  std::vector<RationalApproximant> out;
  std::int64_t h2 = 0, h1 = 1;  // numerators N_{k-2}, N_{k-1}
  std::int64_t k2 = 1, k1 = 0;  // denominators
  double x = target;
  for (int depth = 0; depth < 64; ++depth) {
    const double a_real = std::floor(x);
    if (a_real > static_cast<double>(max_denominator)) break;
    const auto a = static_cast<std::int64_t>(a_real);
    const std::int64_t h = a * h1 + h2;
    const std::int64_t k = a * k1 + k2;
    if (k > max_denominator) break;
    if (k >= 2) out.push_back({h, k, target});
    const double frac = x - a_real;
    // remainder below double resolution: the expansion has terminated
    if (frac <= 1e-12 * std::max(1.0, x)) break;
    x = 1.0 / frac;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Families

PerturbedFamily::PerturbedFamily(std::string name, MapDef base, Schedule schedule)
    : name_(std::move(name)), base_(std::move(base)), schedule_(std::move(schedule)) {
  if (!schedule_) throw InvalidInput("perturbed family needs a schedule");
  if (!(schedule_(0.0) == base_)) throw InvalidInput("family '" + name_ + "': schedule(0) must equal the base map");
}

MapDef PerturbedFamily::at(double eps) const {
  MapDef m = schedule_(eps);
  if (m.space() != base_.space()) {
    throw DimensionMismatch("family '" + name_ + "' changes phase space at eps=" + std::to_string(eps));
  }
  return m;
}

PerturbedFamily PerturbedFamily::rotation_approximants(double alpha, double beta, std::int64_t max_denominator) {
  auto approx = std::make_shared<const std::vector<RationalApproximant>>(convergents(alpha, max_denominator));
  MapDef base(TorusRotation{alpha, beta});
  return PerturbedFamily("rotation_approximants", base, [approx, base, beta](double eps) -> MapDef {
    if (eps < 0.0 || eps != std::floor(eps)) throw InvalidInput("rotation family index must be a non-negative integer");
    const auto k = static_cast<std::size_t>(eps);
    if (k == 0) return base;
    if (k > approx->size()) throw InvalidInput("rotation family index beyond available convergents");
    return MapDef(TorusRotation{(*approx)[k - 1].value(), beta});
  });
}

PerturbedFamily PerturbedFamily::k_sweep(const MapDef& standard_map) {
  if (const auto* m = std::get_if<StandardMapTorus>(&standard_map.kind())) {
    const double k0 = m->k;
    return PerturbedFamily("k_sweep", standard_map,
                           [k0](double eps) { return MapDef(StandardMapTorus{k0 + eps}); });
  }
  if (const auto* m = std::get_if<StandardMapCylinder>(&standard_map.kind())) {
    const double k0 = m->k;
    return PerturbedFamily("k_sweep", standard_map,
                           [k0](double eps) { return MapDef(StandardMapCylinder{k0 + eps}); });
  }
  throw InvalidInput("k_sweep needs a standard map");
}

PerturbedFamily PerturbedFamily::amplitude_sweep(const MapDef& base) {
  if (base.space().dim() != 2) throw DimensionMismatch("amplitude sweep acts on (p, q) maps");
  const bool cylinder = !base.space().periodic(0);
  return PerturbedFamily("amplitude_sweep", base, [base, cylinder](double eps) -> MapDef {
    if (eps == 0.0) return base;
    return MapDef::compose({base, MapDef(Kick{eps, cylinder})});
  });
}

}  // namespace ergostab
