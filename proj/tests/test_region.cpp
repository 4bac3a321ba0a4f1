#include <gtest/gtest.h>

#include <random>

#include "dispctl/errors.hpp"
#include "dispctl/region.hpp"
#include "oracles.hpp"

using namespace dispctl;
using oracle::cd;
using oracle::pi;

namespace {

IntervalUnion random_union(std::mt19937_64& rng, int max_pieces, double period = 2 * pi) {
  std::uniform_int_distribution<int> count(1, max_pieces);
  std::uniform_real_distribution<double> u(0, period);
  std::vector<Interval> iv;
  const int n = count(rng);
  for (int j = 0; j < n; ++j) {
    const double a = u(rng), len = 0.3 * u(rng) / n;
    iv.push_back({a, a + len});
  }
  return IntervalUnion(iv, period);
}

bool member(const std::vector<Interval>& iv, double s) {
  for (const Interval& i : iv)
    if (s >= i.lo && s < i.hi) return true;
  return false;
}

}  // namespace

TEST(IntervalUnion, MeasureExamples) {
  EXPECT_NEAR(IntervalUnion({{0, pi}, {1.5 * pi, 2 * pi}}).measure(), 1.5 * pi, 1e-15);
  EXPECT_EQ(IntervalUnion().measure(), 0.0);
  EXPECT_NEAR(SpaceTimeRegion::product(IntervalUnion({{0, 1}}), IntervalUnion({{0, pi}})).measure(), pi, 1e-15);
}

TEST(IntervalUnion, NormalizesWrapsAndMerges) {
  const IntervalUnion u({{5, 6.5}, {0.5, 1}, {0.9, 1.2}}, 2 * pi);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_NEAR(u.intervals()[0].lo, 0.0, 0);
  EXPECT_NEAR(u.intervals()[0].hi, 6.5 - 2 * pi, 1e-15);
  EXPECT_NEAR(u.intervals()[1].lo, 0.5, 0);
  EXPECT_NEAR(u.intervals()[1].hi, 1.2, 0);
  EXPECT_NEAR(u.intervals()[2].lo, 5, 0);
  EXPECT_NEAR(u.intervals()[2].hi, 2 * pi, 0);
  EXPECT_NEAR(u.measure(), 1.5 + 0.7, 1e-14);
  EXPECT_EQ(IntervalUnion({{5, 7}, {0.5, 1}}).size(), 2u);
  EXPECT_EQ(IntervalUnion({{-1, 100}}).measure(), 2 * pi);
  EXPECT_THROW(IntervalUnion({{2, 1}}), std::invalid_argument);
}

TEST(IntervalUnion, IndicatorFourierExamples) {
  const IntervalUnion f({{0, pi}});
  EXPECT_NEAR(std::abs(f.indicator_fourier(0) - cd(0.5, 0)), 0, 1e-16);
  EXPECT_NEAR(std::abs(f.indicator_fourier(1) - cd(0, -1 / pi)), 0, 1e-16);
  EXPECT_NEAR(std::abs(IntervalUnion::full().indicator_fourier(5)), 0, 1e-16);
}

TEST(IntervalUnion, IndicatorFourierMatchesQuadratureAndConjugates) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double period = trial % 2 ? 2 * pi : 2.0;
    const IntervalUnion u = random_union(rng, 4, period);
    for (std::int64_t a : {-7, -1, 0, 2, 13}) {
      const cd c = u.indicator_fourier(a);
      EXPECT_LT(std::abs(c - std::conj(u.indicator_fourier(-a))), 1e-16);
      cd q = 0;
      for (const Interval& i : u.intervals())
        q += oracle::gauss([&](double s) { return std::polar(1.0, -a * 2 * pi / period * s); }, i.lo, i.hi, 20);
      EXPECT_LT(std::abs(c - q / period), 1e-14);
    }
  }
}

TEST(IntervalUnion, TranslateExamples) {
  const IntervalUnion t = IntervalUnion({{0, 1}}).translate(0.5);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.intervals()[0].lo, 0.5);
  EXPECT_EQ(t.intervals()[0].hi, 1.5);
  const IntervalUnion w = IntervalUnion({{5, 6}}).translate(1.5);
  EXPECT_NEAR(w.measure(), 1.0, 1e-14);
  EXPECT_TRUE(w.contains(0.3));
  EXPECT_TRUE(w.contains(6.6));
  EXPECT_FALSE(w.contains(6.4));
  const IntervalUnion g({{0, 1}, {2, 3}});
  EXPECT_NEAR(intersect(g, g.translate(0)).measure(), g.measure(), 0);
}

TEST(IntervalUnion, DifferenceShrinksWithShift) {
  const IntervalUnion g({{0, pi}});
  double prev = 1e9;
  for (double h : {0.1, 0.01, 0.001}) {
    const double d = set_difference(g, g.translate(-h)).measure();
    EXPECT_NEAR(d, std::min(h, pi), 4e-15);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(IntervalUnion, SetAlgebraAgreesWithPointMembership) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 2 * pi);
  for (int trial = 0; trial < 30; ++trial) {
    const IntervalUnion a = random_union(rng, 5), b = random_union(rng, 5);
    const IntervalUnion i = intersect(a, b), d = set_difference(a, b), un = unite(a, b);
    EXPECT_NEAR(i.measure() + d.measure(), a.measure(), 1e-14);
    for (int s = 0; s < 200; ++s) {
      const double x = u(rng);
      const bool in_a = member(a.intervals(), x), in_b = member(b.intervals(), x);
      EXPECT_EQ(i.contains(x), in_a && in_b);
      EXPECT_EQ(d.contains(x), in_a && !in_b);
      EXPECT_EQ(un.contains(x), in_a || in_b);
    }
  }
}

TEST(SpaceTimeRegion, RejectsOverlapAndRequiresPeriods) {
  const IntervalUnion t({{0, 1}}, 2.0), x({{0, 1}});
  EXPECT_THROW(SpaceTimeRegion({{t, x}, {t, x}}, 2.0), std::invalid_argument);
  EXPECT_THROW(SpaceTimeRegion({{t, x}}, 3.0), std::invalid_argument);
}

TEST(SpaceTimeRegion, IndicatorFourierMatchesTwoDimensionalQuadrature) {
  const double T = 3.0;
  const SpaceTimeRegion g({{IntervalUnion({{0, 1}, {1.5, 2}}, T), IntervalUnion({{0, pi}, {4, 5}})},
                           {IntervalUnion({{2.2, 2.9}}, T), IntervalUnion({{1, 2}})}},
                          T);
  for (LatticePoint a : {LatticePoint{0, 0}, LatticePoint{1, 0}, LatticePoint{-2, 3}, LatticePoint{5, -1}}) {
    cd q = 0;
    for (const Rectangle& r : g.rectangles())
      for (const Interval& it : r.time.intervals())
        for (const Interval& ix : r.space.intervals())
          q += oracle::gauss(
              [&](double t) {
                return oracle::gauss(
                    [&](double x) { return std::polar(1.0, -(a.space * x + a.time * 2 * pi / T * t)); }, ix.lo, ix.hi,
                    8);
              },
              it.lo, it.hi, 8);
    EXPECT_LT(std::abs(g.indicator_fourier(a) - q / (2 * pi * T)), 1e-14);
  }
}

TEST(SpaceTimeRegion, SetAlgebraAdditivityAndMembership) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ut(0, 2.0), ux(0, 2 * pi), uh(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const SpaceTimeRegion g({{random_union(rng, 3, 2.0).clip(0, 1), random_union(rng, 3)},
                             {IntervalUnion({{1.0, 1.4}}, 2.0), IntervalUnion({{5.9, 6.2}})}},
                            2.0);
    const Shift h{uh(rng), uh(rng)};
    const SpaceTimeRegion moved = g.translate(h);
    const SpaceTimeRegion i = intersect(g, moved), d = set_difference(g, moved);
    EXPECT_NEAR(i.measure() + d.measure(), g.measure(), 1e-13);
    EXPECT_NEAR(moved.measure(), g.measure(), 1e-13);
    for (int s = 0; s < 200; ++s) {
      const double t = ut(rng), x = ux(rng);
      const bool in_g = g.contains(t, x), in_m = moved.contains(t, x);
      EXPECT_EQ(in_m, g.contains(t - h.t, x - h.x));
      EXPECT_EQ(i.contains(t, x), in_g && in_m);
      EXPECT_EQ(d.contains(t, x), in_g && !in_m);
    }
  }
}

TEST(TailEnergy, FullCellHasNoTail) {
  for (double T : {2 * pi, 1.7})
    for (int n : {0, 1, 5, 40}) EXPECT_NEAR(tail_energy(SpaceTimeRegion::full_cell(T), n), 0, 1e-16);
}

TEST(TailEnergy, HalfCellAgainstDirectSumToTenThousand) {
  // G = [0,pi) x [0,2pi): the space factor kills every alpha_x != 0, so the
  // direct sum over |alpha| <= 1e4 is a one-dimensional sum over alpha_t.
  const SpaceTimeRegion g = SpaceTimeRegion::product(IntervalUnion({{0, pi}}), IntervalUnion::full());
  const double total = plancherel_total(g);
  EXPECT_NEAR(total, 0.5, 1e-16);
  long double direct = 0;
  for (int a = -10000; a <= 10000; ++a) {
    const cd v = a == 0 ? cd(0.5) : (1.0 - std::polar(1.0, -a * pi)) / (cd(0, 1) * (2.0 * pi * a));
    direct += std::norm(v);
  }
  EXPECT_NEAR(disk_energy(g, 10000), static_cast<double>(direct), 1e-14);
  EXPECT_NEAR(tail_energy(g, 0), total - 0.25, 1e-16);
  EXPECT_NEAR(tail_energy(g, 10000), total - static_cast<double>(direct), 1e-14);
}

TEST(TailEnergy, DiskSumMatchesBruteForceAndIsMonotone) {
  const SpaceTimeRegion g({{IntervalUnion({{0, 1}, {1.5, 2}}, 2.0), IntervalUnion({{0, pi}, {4, 5}})},
                           {IntervalUnion({{1.0, 1.5}}, 2.0), IntervalUnion({{2, 3.5}})}},
                          2.0);
  double prev = plancherel_total(g);
  for (int n = 0; n <= 30; ++n) {
    long double brute = 0;
    for (int a = -n; a <= n; ++a)
      for (int b = -n; b <= n; ++b)
        if (a * a + b * b <= n * n) brute += std::norm(g.indicator_fourier({a, b}));
    EXPECT_NEAR(disk_energy(g, n), static_cast<double>(brute), 1e-14);
    const double t = tail_energy(g, n);
    EXPECT_NEAR(t + disk_energy(g, n), plancherel_total(g), 1e-12);
    EXPECT_LE(t, prev + 1e-16);
    prev = t;
  }
}

TEST(RegionParse, ExpressionsAndUnions) {
  EXPECT_NEAR(parse_real_expression("3*pi/2"), 1.5 * pi, 1e-15);
  EXPECT_NEAR(parse_real_expression("2pi - (1/4)"), 2 * pi - 0.25, 1e-15);
  EXPECT_NEAR(parse_real_expression("-pi/2 + 1e-1"), -pi / 2 + 0.1, 1e-15);
  const IntervalUnion u = parse_interval_union("[0, pi) U [3*pi/2, 2*pi)", 2 * pi);
  EXPECT_NEAR(u.measure(), 1.5 * pi, 1e-15);
  const SpaceTimeRegion g = parse_space_time_region("[0,1) U [1.5,2) x [0,pi) U [4,5) ; [1,1.5) x [0,1)", 2.0);
  EXPECT_EQ(g.rectangles().size(), 2u);
  EXPECT_NEAR(g.measure(), 1.5 * (pi + 1) + 0.5, 1e-14);
}

TEST(RegionParse, DiagnosticsCarryColumn) {
  try {
    parse_interval_union("[0, )", 2 * pi);
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_interval_union("[0, 1", 2 * pi), ConfigError);
  EXPECT_THROW(parse_interval_union("[2, 1)", 2 * pi), ConfigError);
  EXPECT_THROW(parse_interval_union("", 2 * pi), ConfigError);
  EXPECT_THROW(parse_space_time_region("[0,1) x [0,1) ; [0,1) x [0,1)", 2.0), ConfigError);
}
