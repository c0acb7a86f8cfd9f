#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ergostab/errors.hpp"
#include "ergostab/maps.hpp"
#include "ergostab/numeric.hpp"

using namespace ergostab;

namespace {

const PhaseSpace kTorus = PhaseSpace::torus(2);
constexpr double kGolden = 0.6180339887498949;
const double kBeta = std::sqrt(2.0) - 1.0;

PhasePoint pt(double a, double b) { return PhasePoint(kTorus, {a, b}); }

// distance on the circle for periodic axes
double circle_gap(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

double max_gap(const PhasePoint& x, const PhasePoint& y) {
  double g = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    g = std::max(g, x.space().periodic(i) ? circle_gap(x[i], y[i]) : std::abs(x[i] - y[i]));
  }
  return g;
}

std::vector<MapDef> torus_maps() {
  return {MapDef(TorusRotation{kGolden, kBeta}),
          MapDef(StandardMapTorus{0.97}),
          MapDef(StandardMapTorus{5.0}),
          MapDef(Kick{1.3, false}),
          MapDef::compose({MapDef(StandardMapTorus{1.2}), MapDef(TorusRotation{0.1, 0.3})})};
}

}  // namespace

TEST_CASE("step examples") {
  const PhasePoint r = step(MapDef(TorusRotation{0.25, 0.5}), pt(0.9, 0.9));
  CHECK(r[0] == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(0.4).epsilon(1e-14));

  const PhasePoint s = step(MapDef(StandardMapTorus{0.0}), pt(0.2, 0.3));
  CHECK(s[0] == 0.2);
  CHECK(s[1] == doctest::Approx(0.5).epsilon(1e-15));

  const PhaseSpace cyl = PhaseSpace::cylinder();
  const PhasePoint c = step(MapDef(StandardMapCylinder{1.0}), PhasePoint(cyl, {0.0, 0.25}));
  const double oracle = 1.0 / (2.0 * std::numbers::pi);
  CHECK(c[0] == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(c[0] == doctest::Approx(0.159155).epsilon(1e-6));
  CHECK(c[1] == doctest::Approx(0.25 + oracle).epsilon(1e-15));
}

TEST_CASE("cylinder momentum is not wrapped") {
  const PhaseSpace cyl = PhaseSpace::cylinder();
  const MapDef m(StandardMapCylinder{20.0});
  PhasePoint x(cyl, {0.9, 0.25});
  x = step(m, x);
  CHECK(x[0] > 1.0);
  CHECK(x[1] >= 0.0);
  CHECK(x[1] < 1.0);
}

TEST_CASE("cylinder map reduces to the torus map mod 1") {
  const PhaseSpace cyl = PhaseSpace::cylinder();
  const MapDef torus(StandardMapTorus{2.3});
  const MapDef cylinder(StandardMapCylinder{2.3});
  PhasePoint a = pt(0.3, 0.71);
  PhasePoint b(cyl, {0.3, 0.71});
  for (int i = 0; i < 50; ++i) {
    a = step(torus, a);
    b = step(cylinder, b);
    CHECK(circle_gap(a[0], wrap_unit(b[0])) < 1e-9);
    CHECK(circle_gap(a[1], b[1]) < 1e-9);
  }
}

TEST_CASE("iterate identities") {
  for (const MapDef& m : torus_maps()) {
    const PhasePoint x = pt(0.123, 0.456);
    CHECK(iterate(m, x, 0) == x);
    CHECK(iterate(m, x, 2) == step(m, step(m, x)));
    CHECK(iterate(m, x, 17 + 23) == iterate(m, iterate(m, x, 17), 23));
  }
  const PhasePoint y = iterate(MapDef(TorusRotation{0.6, kBeta}), pt(0.1, 0.2), 5);
  CHECK(circle_gap(y[0], 0.1) < 1e-12);
}

TEST_CASE("orbit visitor agrees with iterate bit for bit") {
  const MapDef m(StandardMapTorus{1.7});
  const PhasePoint x0 = pt(0.31, 0.27);
  std::vector<PhasePoint> orbit;
  for_each_orbit_point(m, x0, 40, [&](const PhasePoint& x, std::uint64_t) { orbit.push_back(x); });
  REQUIRE(orbit.size() == 40);
  for (std::uint64_t n = 0; n < orbit.size(); ++n) CHECK(orbit[n] == iterate(m, x0, n));
}

TEST_CASE("inverse step undoes step") {
  std::vector<MapDef> maps = torus_maps();
  maps.push_back(MapDef::skew(MapDef(StandardMapTorus{1.1}), {kGolden, kBeta}, {0.3, 0.2}));
  maps.push_back(MapDef(StandardMapCylinder{6.0}));
  for (const MapDef& m : maps) {
    CounterRng rng(17, 0);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> c(m.space().dim());
      for (double& v : c) v = rng.uniform();
      const PhasePoint x = wrap(m.space(), c);
      CHECK(max_gap(inverse_step(m, step(m, x)), x) <= 1e-12);
    }
  }
}

TEST_CASE("maps preserve area on a 4x4 grid") {
  const std::size_t n = 100000;
  const std::vector<PhasePoint> pts = sample_ensemble({Region::whole(kTorus), n, Sampler::pseudo_random, 99});
  const GridPartition grid = GridPartition::uniform(kTorus, {4, 4});
  for (const MapDef& m : torus_maps()) {
    std::vector<double> before(16, 0.0);
    std::vector<double> after(16, 0.0);
    for (const PhasePoint& x : pts) {
      before[grid.cell_index(x)] += 1.0;
      after[grid.cell_index(step(m, x))] += 1.0;
    }
    for (std::size_t c = 0; c < 16; ++c) {
      const double p = 1.0 / 16.0;
      const double se = std::sqrt(2.0 * p * (1.0 - p) / static_cast<double>(n));
      CHECK_MESSAGE(std::abs(after[c] - before[c]) / static_cast<double>(n) <= 3.0 * se, m.describe());
    }
  }
}

TEST_CASE("skew product modulates the kick and advances the angles") {
  const double k = 1.5;
  const MapDef m = MapDef::skew(MapDef(StandardMapTorus{k}), {0.3, 0.7}, {0.25, 0.5});
  CHECK(m.space().dim() == 4);
  const PhasePoint x(m.space(), {0.1, 0.2, 0.05, 0.6});
  const PhasePoint y = step(m, x);
  const double factor = 1.0 + 0.25 * std::cos(2.0 * std::numbers::pi * 0.05) + 0.5 * std::cos(2.0 * std::numbers::pi * 0.6);
  const double p = wrap_unit(0.1 + k * factor / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * 0.2));
  CHECK(y[0] == doctest::Approx(p).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(wrap_unit(0.2 + p)).epsilon(1e-14));
  CHECK(y[2] == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(y[3] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("zero modulation reproduces the base map exactly") {
  const MapDef base(StandardMapCylinder{7.0});
  const MapDef skew = MapDef::skew(base, {kGolden, kBeta}, {0.0, 0.0});
  PhasePoint a(base.space(), {0.01, 0.4});
  PhasePoint b(skew.space(), {0.01, 0.4, 0.9, 0.2});
  for (int i = 0; i < 1000; ++i) {
    a = step(base, a);
    b = step(skew, b);
  }
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
}

TEST_CASE("maps reject points from another space") {
  const MapDef m(TorusRotation{0.1, 0.2});
  CHECK_THROWS_AS(step(m, PhasePoint(PhaseSpace::cylinder(), {0.1, 0.1})), DimensionMismatch);
  CHECK_THROWS_AS(iterate(m, PhasePoint(PhaseSpace::torus(3), {0.1, 0.1, 0.1}), 3), DimensionMismatch);
  CHECK_THROWS_AS(MapDef::skew(m, {0.1}, {0.1, 0.2}), InvalidInput);
}

TEST_CASE("golden mean convergents are Fibonacci ratios") {
  // oracle: F_k / F_{k+1}
  std::vector<std::int64_t> fib{1, 1};
  while (fib.back() < 100) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
  const auto c = convergents(kGolden, 40);
  REQUIRE(c.size() == 7);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].numerator == fib[i + 1]);
    CHECK(c[i].denominator == fib[i + 2]);
  }
  CHECK(c.front().denominator == 2);
  CHECK(c.back().numerator == 21);
  CHECK(c.back().denominator == 34);
}

TEST_CASE("convergent properties") {
  for (double target : {kGolden, kBeta, 1.0 / std::numbers::pi, 0.5, 0.999, 1e-3}) {
    const auto c = convergents(target, 100000);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto& a = c[i];
      CHECK(std::gcd(a.numerator, a.denominator) == 1);
      const double d = static_cast<double>(a.denominator);
      CHECK(std::abs(target - a.value()) < 1.0 / (d * d));
      if (i > 0) CHECK(a.denominator > c[i - 1].denominator);
    }
  }
  const auto half = convergents(0.5, 1000);
  REQUIRE(half.size() == 1);
  CHECK(half[0].numerator == 1);
  CHECK(half[0].denominator == 2);
  CHECK_THROWS_AS(convergents(NAN, 10), InvalidInput);
  CHECK_THROWS_AS(convergents(1.5, 10), InvalidInput);
}

TEST_CASE("built-in families") {
  const auto rot = PerturbedFamily::rotation_approximants(kGolden, kBeta, 40);
  CHECK(rot.at(0) == MapDef(TorusRotation{kGolden, kBeta}));
  CHECK(rot.at(3) == MapDef(TorusRotation{3.0 / 5.0, kBeta}));
  CHECK_THROWS_AS(rot.at(0.5), InvalidInput);
  CHECK_THROWS_AS(rot.at(50), InvalidInput);

  const auto sweep = PerturbedFamily::k_sweep(MapDef(StandardMapTorus{0.5}));
  CHECK(sweep.at(0.0) == MapDef(StandardMapTorus{0.5}));
  CHECK(sweep.at(1.5) == MapDef(StandardMapTorus{2.0}));
  CHECK_THROWS_AS(PerturbedFamily::k_sweep(MapDef(TorusRotation{0.1, 0.2})), InvalidInput);

  const MapDef base(StandardMapTorus{0.8});
  const auto amp = PerturbedFamily::amplitude_sweep(base);
  CHECK(amp.at(0.0) == base);
  const MapDef kicked = amp.at(0.2);
  REQUIRE(std::holds_alternative<Composite>(kicked.kind()));
  const PhasePoint x = pt(0.3, 0.4);
  const PhasePoint y = step(base, x);
  const double p = wrap_unit(y[0] + 0.2 / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * y[1]));
  CHECK(step(kicked, x)[0] == doctest::Approx(p).epsilon(1e-14));
}

TEST_CASE("families validate their schedule") {
  const MapDef base(TorusRotation{0.1, 0.2});
  CHECK_THROWS_AS(PerturbedFamily("bad", base, [](double) { return MapDef(TorusRotation{0.3, 0.2}); }), InvalidInput);
  const PerturbedFamily grows("grows", base, [base](double e) {
    return e == 0.0 ? base : MapDef::skew(base, {0.5}, {0.0});
  });
  CHECK_THROWS_AS(grows.at(1.0), DimensionMismatch);
}

TEST_CASE("describe names the kind and parameters") {
  CHECK(MapDef(StandardMapTorus{2.0}).describe() == "standard_map_torus(K=2)");
  CHECK(MapDef(TorusRotation{0.5, 0.25}).describe() == "torus_rotation(alpha=0.5,beta=0.25)");
}
