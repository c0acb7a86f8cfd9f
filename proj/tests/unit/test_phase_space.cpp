#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergostab/errors.hpp"
#include "ergostab/numeric.hpp"
#include "ergostab/phase_space.hpp"

using namespace ergostab;

namespace {

const PhaseSpace kTorus = PhaseSpace::torus(2);

PhasePoint pt(double a, double b, const PhaseSpace& s = kTorus) { return PhasePoint(s, {a, b}); }

}  // namespace

TEST_CASE("wrap reduces periodic coordinates into [0,1)") {
  const std::vector<double> a{1.25, 0.5};
  const PhasePoint x = wrap(kTorus, a);
  CHECK(x[0] == 0.25);
  CHECK(x[1] == 0.5);

  const std::vector<double> b{-0.1, 0.0};
  const PhasePoint y = wrap(kTorus, b);
  CHECK(y[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(y[1] == 0.0);

  const PhaseSpace mixed{Axis::periodic, Axis::unbounded};
  const std::vector<double> c{0.7, 3.2};
  const PhasePoint z = wrap(mixed, c);
  CHECK(z[0] == 0.7);
  CHECK(z[1] == 3.2);
}

TEST_CASE("wrap never returns 1 and is idempotent") {
  CHECK(wrap_unit(-1e-18) < 1.0);
  CHECK(wrap_unit(-1e-18) >= 0.0);
  CHECK(wrap_unit(-0.0) == 0.0);
  CounterRng rng(3, 0);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> c{(rng.uniform() - 0.5) * 1e6, (rng.uniform() - 0.5) * 1e-3};
    const PhasePoint once = wrap(kTorus, c);
    const PhasePoint twice = wrap(once);
    CHECK(once == twice);
    CHECK(once[0] >= 0.0);
    CHECK(once[0] < 1.0);
    CHECK(once[1] >= 0.0);
    CHECK(once[1] < 1.0);
  }
}

TEST_CASE("wrap rejects non-finite input and wrong dimension") {
  const std::vector<double> bad{NAN, 0.0};
  CHECK_THROWS_AS(wrap(kTorus, bad), InvalidInput);
  const std::vector<double> inf{0.0, INFINITY};
  CHECK_THROWS_AS(wrap(kTorus, inf), InvalidInput);
  const std::vector<double> three{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(wrap(kTorus, three), DimensionMismatch);
}

TEST_CASE("box indicator uses half-open intervals") {
  const Region box = Region::box(kTorus, {{0.0, 0.25}, {0.0, 0.25}});
  CHECK(indicator(box, pt(0.1, 0.2)) == 1);
  CHECK(indicator(box, pt(0.25, 0.1)) == 0);
  CHECK(indicator(box, pt(0.0, 0.0)) == 1);
  CHECK(box.volume() == doctest::Approx(0.0625));
}

TEST_CASE("wrapped box crosses zero") {
  const Region box = Region::box(kTorus, {{0.9, 0.1}, {0.0, 1.0}});
  CHECK(indicator(box, pt(0.95, 0.5)) == 1);
  CHECK(indicator(box, pt(0.05, 0.5)) == 1);
  CHECK(indicator(box, pt(0.1, 0.5)) == 0);
  CHECK(indicator(box, pt(0.5, 0.5)) == 0);
  CHECK(box.volume() == doctest::Approx(0.2));
}

TEST_CASE("indicator of complementary boxes sums to one") {
  const Region a = Region::box(kTorus, {{0.2, 0.7}, {0.0, 1.0}});
  const Region b = Region::box(kTorus, {{0.7, 0.2}, {0.0, 1.0}});
  CounterRng rng(11, 4);
  for (int i = 0; i < 1000; ++i) {
    const PhasePoint x = pt(rng.uniform(), rng.uniform());
    CHECK(indicator(a, x) + indicator(b, x) == 1);
  }
}

TEST_CASE("indicator rejects a point from another space") {
  const Region box = Region::box(kTorus, {{0.0, 0.5}, {0.0, 0.5}});
  const PhasePoint x(PhaseSpace::cylinder(), {0.1, 0.1});
  CHECK_THROWS_AS(indicator(box, x), DimensionMismatch);
}

TEST_CASE("disk uses the minimum-image metric") {
  const Region disk = Region::disk({0.98, 0.5}, 0.1);
  CHECK(indicator(disk, pt(0.02, 0.5)) == 1);
  CHECK(indicator(disk, pt(0.04, 0.5)) == 0);
  CHECK(disk.volume() == doctest::Approx(std::numbers::pi * 0.0025));
}

TEST_CASE("cell index is row-major with axis 0 fastest") {
  const GridPartition g = GridPartition::uniform(kTorus, {4, 4});
  CHECK(g.cell_count() == 16);
  CHECK(g.cell_index(pt(0.1, 0.9)) == 3 * 4 + 0);
  CHECK(g.cell_index(pt(0.9, 0.1)) == 3);
  CHECK(g.cell_index(pt(std::nextafter(1.0, 0.0), std::nextafter(1.0, 0.0))) == g.cell_count() - 1);
  CHECK_FALSE(g.has_overflow());
}

TEST_CASE("cylinder points outside the window go to overflow") {
  const PhaseSpace cyl = PhaseSpace::cylinder();
  const GridPartition g = GridPartition::uniform(cyl, {16, 4}, Interval{-8.0, 8.0});
  CHECK(g.has_overflow());
  CHECK(g.cell_index(PhasePoint(cyl, {9.0, 0.5})) == g.overflow_index());
  CHECK(g.cell_index(PhasePoint(cyl, {-8.0, 0.5})) == 0 + 16 * 2);
  CHECK(g.cell_index(PhasePoint(cyl, {8.0, 0.5})) == g.overflow_index());
  CHECK(g.cell_index(PhasePoint(cyl, {0.5, 0.3})) == 8 + 16 * 1);
}

TEST_CASE("cell volumes tile the window") {
  const PhaseSpace cyl = PhaseSpace::cylinder();
  for (const auto& [g, window] :
       {std::pair{GridPartition::uniform(kTorus, {7, 13}), 1.0},
        std::pair{GridPartition::uniform(cyl, {33, 5}), 16.0 * std::numbers::pi},
        std::pair{GridPartition::uniform(PhaseSpace::torus(3), {3, 5, 7}), 1.0}}) {
    std::vector<double> vols(g.cell_count(), g.cell_volume());
    const double total = pairwise_sum<double>(vols);
    CHECK(std::abs(total - window) <= 1e-12 * window);
    CHECK(std::abs(g.window_volume() - window) <= 1e-12 * window);
  }
}

TEST_CASE("every point maps into exactly one cell whose bounds contain it") {
  const GridPartition g = GridPartition::uniform(kTorus, {8, 8});
  CounterRng rng(5, 5);
  for (int i = 0; i < 500; ++i) {
    const PhasePoint x = pt(rng.uniform(), rng.uniform());
    const std::size_t id = g.cell_index(x);
    const auto b = g.cell_bounds(id);
    CHECK(x[0] >= b[0].lo);
    CHECK(x[0] < b[0].hi);
    CHECK(x[1] >= b[1].lo);
    CHECK(x[1] < b[1].hi);
    CHECK(g.cell_index(g.cell_center(id)) == id);
  }
}

TEST_CASE("sample_ensemble is deterministic and prefix-stable") {
  const EnsembleSpec spec{Region::whole(kTorus), 3, Sampler::pseudo_random, 42};
  const auto a = sample_ensemble(spec);
  const auto b = sample_ensemble(spec);
  REQUIRE(a.size() == 3);
  CHECK(a == b);
  EnsembleSpec longer = spec;
  longer.count = 10;
  const auto c = sample_ensemble(longer);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == c[i]);
  EnsembleSpec other = spec;
  other.seed = 43;
  CHECK(sample_ensemble(other) != a);
}

TEST_CASE("disk samples stay within the radius") {
  const Region disk = Region::disk({0.5, 0.5}, 0.1);
  const auto pts = sample_ensemble({disk, 2000, Sampler::pseudo_random, 7});
  for (const PhasePoint& x : pts) {
    CHECK(std::hypot(x[0] - 0.5, x[1] - 0.5) <= 0.05);
    CHECK(indicator(disk, x) == 1);
  }
}

TEST_CASE("samples lie inside boxes, wrapped boxes and lattices") {
  const Region wrapped = Region::box(kTorus, {{0.8, 0.1}, {0.3, 0.4}});
  for (Sampler s : {Sampler::pseudo_random, Sampler::lattice}) {
    const auto pts = sample_ensemble({wrapped, 997, s, 9});
    for (const PhasePoint& x : pts) CHECK(indicator(wrapped, x) == 1);
  }
}

TEST_CASE("uniform samples have the right mean") {
  const auto pts = sample_ensemble({Region::whole(kTorus), 100000, Sampler::pseudo_random, 1});
  double mp = 0.0;
  double mq = 0.0;
  for (const PhasePoint& x : pts) {
    mp += x[0];
    mq += x[1];
  }
  // 3 sigma of the mean is 3 * sqrt(1/12) / sqrt(1e5) ~ 2.7e-3
  CHECK(std::abs(mp / 1e5 - 0.5) < 0.01);
  CHECK(std::abs(mq / 1e5 - 0.5) < 0.01);
}

TEST_CASE("lattice points are evenly spread across cells") {
  const std::size_t n = 4096;
  const auto pts = sample_ensemble({Region::whole(kTorus), n, Sampler::lattice, 3});
  const GridPartition g = GridPartition::uniform(kTorus, {8, 8});
  std::vector<int> counts(g.cell_count(), 0);
  for (const PhasePoint& x : pts) ++counts[g.cell_index(x)];
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  // a rank-1 lattice fills every cell within a few points of n / 64
  CHECK(*lo >= 54);
  CHECK(*hi <= 74);
}

TEST_CASE("sampling rejects degenerate requests") {
  CHECK_THROWS_AS(sample_ensemble({Region::box(kTorus, {{0.2, 0.2}, {0.0, 1.0}}), 4, Sampler::pseudo_random, 0}),
                  InvalidInput);
  CHECK_THROWS_AS(sample_ensemble({Region::whole(kTorus), 0, Sampler::pseudo_random, 0}), InvalidInput);
}

TEST_CASE("counter rng streams are reproducible and distinct") {
  CounterRng a(1, 2);
  CounterRng b(1, 2);
  CounterRng c(1, 3);
  const double x = a.uniform();
  CHECK(x == b.uniform());
  CHECK(x != c.uniform());
  CHECK(x >= 0.0);
  CHECK(x < 1.0);
}
