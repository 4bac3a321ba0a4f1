#include <gtest/gtest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <random>

#include "dispctl/errors.hpp"
#include "dispctl/grid.hpp"
#include "oracles.hpp"

using namespace dispctl;
using oracle::cd;
using oracle::pi;

TEST(DispersionSymbol, ExactIntegerValues) {
  const DispersionSymbol p({0, 0, 1, 0, 1});  // k^4 + k^2
  EXPECT_EQ(p(3), 90);
  EXPECT_EQ(p(-3), 90);
  EXPECT_EQ(p.degree(), 4);
  const DispersionSymbol cube = DispersionSymbol::cubic();
  EXPECT_EQ(cube(1000000), 1000000000000000000LL);
  EXPECT_THROW(cube(3000000), std::overflow_error);
}

TEST(DispersionSymbol, RejectsNonMonicAndLowDegree) {
  EXPECT_THROW(DispersionSymbol({0, 0, 2}), std::invalid_argument);
  EXPECT_THROW(DispersionSymbol({0, 1}), std::invalid_argument);
}

TEST(DispersionSymbol, ParsesPolynomialText) {
  EXPECT_EQ(DispersionSymbol::parse("k^3"), DispersionSymbol::cubic());
  EXPECT_EQ(DispersionSymbol::parse("k^4 + k^2"), DispersionSymbol({0, 0, 1, 0, 1}));
  EXPECT_EQ(DispersionSymbol::parse("k^3 - 2*k + 1"), DispersionSymbol({1, -2, 0, 1}));
  EXPECT_EQ(DispersionSymbol::parse("k^3 - 2*k + 1").to_string(), "k^3 - 2*k + 1");
  EXPECT_THROW(DispersionSymbol::parse("k^3 +"), ConfigError);
  EXPECT_THROW(DispersionSymbol::parse("2*k^2"), ConfigError);
}

TEST(FourierState, ReadsOutsideBandAreZero) {
  FourierState s = FourierState::delta(3, 2, cd(1, 1));
  EXPECT_EQ(s[2], cd(1, 1));
  EXPECT_EQ(s[4], cd(0));
  EXPECT_EQ(s[-100], cd(0));
  EXPECT_THROW(s.at(4), std::out_of_range);
  EXPECT_TRUE(s.is_zero_mean());
  s.at(0) = 1e-300;
  EXPECT_FALSE(s.is_zero_mean());
  EXPECT_TRUE(s.zero_mean_part().is_zero_mean());
}

TEST(FourierState, ResizePadsAndTruncates) {
  std::mt19937_64 rng(1);
  const FourierState s = oracle::random_state(5, rng);
  const FourierState big = s.resized(9);
  for (int k = -9; k <= 9; ++k) EXPECT_EQ(big[k], s[k]);
  const FourierState small = s.resized(2);
  for (int k = -5; k <= 5; ++k) EXPECT_EQ(small[k], std::abs(k) <= 2 ? s[k] : cd(0));
}

TEST(EvolveFree, Examples) {
  const FourierState a = evolve_free(FourierState::delta(4, 1), DispersionSymbol::cubic(), pi);
  EXPECT_NEAR(std::abs(a[1] - cd(-1, 0)), 0.0, 1e-15);
  const FourierState b = evolve_free(FourierState::delta(4, 2), DispersionSymbol::monomial(2), pi / 4);
  EXPECT_NEAR(std::abs(b[2] - cd(-1, 0)), 0.0, 1e-15);
  std::mt19937_64 rng(2);
  const FourierState s = oracle::random_state(6, rng);
  const FourierState c = evolve_free(s, DispersionSymbol::cubic(), 0.0);
  EXPECT_EQ((c.coeffs() - s.coeffs()).norm(), 0.0);
}

TEST(EvolveFree, NormGroupAndZeroMeanProperties) {
  std::mt19937_64 rng(3);
  // Dyadic times, so t1 + t2 carries no rounding of its own.
  std::uniform_int_distribution<int> ut(-50 * 1024, 50 * 1024);
  const DispersionSymbol p({0, 0, 1, 0, 1});
  for (int trial = 0; trial < 50; ++trial) {
    const FourierState s = oracle::random_state(40, rng, trial % 2 == 0);
    const double t1 = ut(rng) / 1024.0, t2 = ut(rng) / 1024.0;
    const FourierState a = evolve_free(s, p, t1 + t2);
    const FourierState b = evolve_free(evolve_free(s, p, t1), p, t2);
    EXPECT_NEAR(l2_norm(a), l2_norm(s), 1e-12 * l2_norm(s));
    EXPECT_LE((a.coeffs() - b.coeffs()).norm(), 1e-12 * s.coeffs().norm());
    if (s.is_zero_mean()) {
      EXPECT_TRUE(a.is_zero_mean());
    }
  }
}

TEST(EvolveFree, LargeSymbolPhaseStaysAccurate) {
  using big = boost::multiprecision::cpp_dec_float_50;
  const DispersionSymbol p = DispersionSymbol::cubic();
  const big two_pi = 2 * boost::math::constants::pi<big>();
  for (std::int64_t k : {999, 5000, 77777}) {
    const double t = 0.7310585786300049;
    const FourierState s = evolve_free(FourierState::delta(static_cast<int>(k), k), p, t);
    const big x = big(p(k)) * big(t);
    const big r = x - floor(x / two_pi) * two_pi;
    const cd expected(static_cast<double>(cos(r)), static_cast<double>(sin(r)));
    EXPECT_LT(std::abs(s[k] - expected), 1e-15) << k;
  }
}

TEST(Norms, Examples) {
  EXPECT_NEAR(l2_norm(FourierState::delta(4, 3)), std::sqrt(2 * pi), 1e-15);
  EXPECT_EQ(l2_norm(FourierState(4)), 0.0);
  FourierState s(2);
  s.at(0) = 1;
  s.at(1) = 1;
  EXPECT_NEAR(l2_norm(s), std::sqrt(4 * pi), 1e-15);
}

TEST(Norms, InnerProductMatchesQuadrature) {
  std::mt19937_64 rng(4);
  const FourierState a = oracle::random_state(6, rng), b = oracle::random_state(6, rng);
  const cd q = oracle::midpoint([&](double x) { return oracle::evaluate(a, x) * std::conj(oracle::evaluate(b, x)); },
                                0, 2 * pi, 64);
  EXPECT_LT(std::abs(inner(a, b) - q), 1e-11);
}

TEST(Grid, Examples) {
  const auto ones = to_grid(FourierState::delta(3, 0), 7);
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(std::abs(ones(j) - cd(1)), 0.0, 1e-15);
  const auto v = to_grid(FourierState::delta(3, 1), 8);
  for (int j = 0; j < 8; ++j) EXPECT_NEAR(std::abs(v(j) - std::polar(1.0, 2 * pi * j / 8)), 0.0, 1e-15);
}

TEST(Grid, MatchesDirectEvaluationAndRoundTrips) {
  std::mt19937_64 rng(5);
  for (int n_max : {1, 7, 32}) {
    for (int n : {2 * n_max + 1, 4 * n_max + 3, 128}) {
      if (n < 2 * n_max + 1) continue;
      const FourierState s = oracle::random_state(n_max, rng);
      GridTransform<double> g(n);
      const auto vals = g.to_grid(s);
      for (int j = 0; j < n; ++j)
        EXPECT_LT(std::abs(vals(j) - oracle::evaluate(s, 2 * pi * j / n)), 1e-12 * s.coeffs().norm());
      const FourierState back = g.from_grid(vals, n_max);
      EXPECT_LE((back.coeffs() - s.coeffs()).norm(), 1e-13 * s.coeffs().norm());
    }
  }
}

TEST(Grid, TemplatedOnScalar) {
  BasicFourierState<long double> s(3);
  s.at(2) = {1.0L, -0.5L};
  GridTransform<long double> g(9);
  const auto back = g.from_grid(g.to_grid(s), 3);
  EXPECT_LT(std::abs(back[2] - s[2]), 2e-16L);
}

TEST(Grid, AliasingSignaled) {
  EXPECT_THROW(to_grid(FourierState::delta(4, 1), 8), AliasingError);
  EXPECT_NO_THROW(to_grid(FourierState::delta(4, 1), 9));
}

TEST(ExpIntegral, MatchesQuadratureIncludingSmallFrequency) {
  for (double w : {0.0, 1e-9, 0.3, 7.0, -40.0, 1e5}) {
    const cd exact = exp_integral(w, 0.25L, 1.75L);
    const cd q = oracle::gauss([&](double s) { return std::polar(1.0, w * s); }, 0.25, 1.75,
                               w > 1e3 ? 20000 : 50);
    EXPECT_LT(std::abs(exact - q), 1e-12) << w;
  }
}
