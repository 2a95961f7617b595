#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "semidiag/error.hpp"
#include "semidiag/special_math.hpp"

using namespace semidiag;
using namespace semidiag::math;

TEST(SpecialMath, LogGammaAndDigammaMatchBoost) {
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.0, 33.3, 150.0}) {
    EXPECT_NEAR(log_gamma(x), boost::math::lgamma(x), 1e-12 * (1 + std::abs(log_gamma(x))));
    EXPECT_NEAR(digamma(x), boost::math::digamma(x), 1e-11 * (1 + std::abs(digamma(x))));
  }
}

TEST(SpecialMath, IncompleteGammaMatchesBoost) {
  for (double a : {0.3, 1.0, 2.0, 7.5, 40.0, 250.0}) {
    for (double x : {1e-3, 0.5, 1.0, 3.0, 10.0, 45.0, 300.0}) {
      EXPECT_NEAR(gamma_p(a, x), boost::math::gamma_p(a, x), 1e-13) << a << ' ' << x;
      EXPECT_NEAR(gamma_q(a, x), boost::math::gamma_q(a, x), 1e-13) << a << ' ' << x;
    }
  }
}

TEST(SpecialMath, IncompleteBetaMatchesBoost) {
  for (double a : {0.4, 1.0, 2.5, 12.0}) {
    for (double b : {0.6, 1.0, 3.0, 20.0}) {
      for (double x : {1e-4, 0.1, 0.35, 0.5, 0.8, 0.999}) {
        EXPECT_NEAR(beta_inc(a, b, x), boost::math::ibeta(a, b, x), 1e-13)
            << a << ' ' << b << ' ' << x;
      }
    }
  }
  EXPECT_EQ(beta_inc(2, 3, 0.0), 0.0);
  EXPECT_EQ(beta_inc(2, 3, 1.0), 1.0);
}

TEST(SpecialMath, NormalQuantileInvertsCdf) {
  for (double u : {1e-300, 1e-12, 1e-4, 0.025, 0.3, 0.5, 0.77, 0.975, 1 - 1e-10}) {
    const double z = normal_quantile(u);
    EXPECT_NEAR(normal_cdf(z), u, 1e-14 + 1e-13 * u);
  }
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_THROW(normal_quantile(0.0), DomainError);
  EXPECT_THROW(normal_quantile(1.0), DomainError);
}

TEST(SpecialMath, NormalLogCdfTail) {
  EXPECT_NEAR(normal_logcdf(-1.0), std::log(normal_cdf(-1.0)), 1e-14);
  // Mills-ratio leading term.
  const double z = -40.0;
  EXPECT_NEAR(normal_logcdf(z), -0.5 * z * z - std::log(-z) - 0.5 * std::log(2 * M_PI), 1e-3);
}

TEST(SpecialMath, GammaQuantileRoundTrip) {
  const GammaParams g{2.0, 0.7};
  for (double u : {1e-6, 0.1, 0.5, 0.9, 0.999999}) {
    EXPECT_NEAR(gamma_cdf(gamma_quantile(u, g), g), u, 1e-12);
  }
}

TEST(SpecialMath, GB2DensityIntegratesToCdf) {
  const GB2Params p{1.7, 2.0, 1.3, 2.4};
  const double y = 3.1;
  const double mass =
      oracle::integrate([&](double t) { return std::exp(gb2_logpdf(t, p)); }, 0.0, y);
  EXPECT_NEAR(gb2_cdf(y, p), mass, 1e-9);
  EXPECT_NEAR(gb2_cdf(gb2_quantile(0.37, p), p), 0.37, 1e-12);
  EXPECT_THROW(gb2_cdf(1.0, GB2Params{-1, 1, 1, 1}), DomainError);
}

TEST(Tweedie, ZeroMassIsExpMinusLambda) {
  for (double mu : {0.1, 1.0, 4.0}) {
    for (double power : {1.1, 1.5, 1.9}) {
      const TweedieParams t{mu, 1.3, power};
      const double lambda = std::pow(mu, 2 - power) / (1.3 * (2 - power));
      EXPECT_NEAR(tweedie_p0(t), std::exp(-lambda), 1e-14);
      EXPECT_EQ(tweedie_cdf(0.0, t), tweedie_p0(t));
    }
  }
}

TEST(Tweedie, DensityMatchesBruteForceSeries) {
  for (double y : {0.05, 0.7, 2.0, 9.0}) {
    for (double power : {1.2, 1.5, 1.8}) {
      for (double phi : {0.4, 2.0}) {
        const TweedieParams t{1.6, phi, power};
        const double expect = oracle::tweedie_density(y, 1.6, phi, power);
        EXPECT_NEAR(std::exp(tweedie_logpdf(y, t)), expect, 1e-10 * expect)
            << y << ' ' << power << ' ' << phi;
      }
    }
  }
}

TEST(Tweedie, CdfIsZeroMassPlusIntegratedDensity) {
  const TweedieParams t{2.0, 1.5, 1.4};
  for (double y : {0.3, 1.5, 6.0}) {
    const double mass =
        oracle::integrate([&](double s) { return std::exp(tweedie_logpdf(s, t)); }, 0.0, y);
    EXPECT_NEAR(tweedie_cdf(y, t), tweedie_p0(t) + mass, 1e-8) << y;
  }
}

TEST(Tweedie, CdfDerivativeIsDensity) {
  const TweedieParams t{0.8, 0.9, 1.65};
  for (double y : {0.2, 1.0, 3.0}) {
    const double h = 1e-5;
    const double slope = (tweedie_cdf(y + h, t) - tweedie_cdf(y - h, t)) / (2 * h);
    EXPECT_NEAR(slope, std::exp(tweedie_logpdf(y, t)), 1e-7) << y;
  }
}

TEST(Tweedie, WideningTheWindowChangesNothing) {
  for (double y : {0.01, 1.0, 25.0}) {
    const TweedieParams t{3.0, 0.5, 1.3};
    SeriesWindow w;
    const double base = tweedie_logpdf(y, t, w);
    const long extra = w.terms();
    const SeriesWindow wide{std::max(1L, w.first - extra), w.last + extra};
    EXPECT_NEAR(tweedie_logpdf_fixed(y, t, wide), base, 1e-10);
  }
}

TEST(Tweedie, CdfMonotoneAndBounded) {
  const TweedieParams t{1.0, 1.0, 1.5};
  double prev = tweedie_cdf(0.0, t);
  for (double y = 0.05; y < 30.0; y *= 1.3) {
    const double c = tweedie_cdf(y, t);
    EXPECT_GE(c, prev);
    EXPECT_LE(c, 1.0);
    prev = c;
  }
  EXPECT_NEAR(prev, 1.0, 1e-9);
}

TEST(Tweedie, MonteCarloEcdfAgreement) {
  // Draw with the standard library's Poisson and gamma generators.
  const TweedieParams t{1.5, 1.2, 1.6};
  const CpgDerived c = to_compound_poisson(t);
  std::mt19937_64 eng(99);
  std::poisson_distribution<long> pois(c.lambda);
  const int n = 200000;
  std::vector<double> draws(n);
  for (auto& d : draws) {
    const long k = pois(eng);
    d = k == 0 ? 0.0 : std::gamma_distribution<double>(k * c.jump_shape, c.jump_scale)(eng);
  }
  std::sort(draws.begin(), draws.end());
  const double band = std::sqrt(std::log(2.0 / 0.0027) / (2.0 * n));
  for (double y : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double ecdf =
        static_cast<double>(std::upper_bound(draws.begin(), draws.end(), y) - draws.begin()) / n;
    EXPECT_NEAR(tweedie_cdf(y, t), ecdf, band) << y;
  }
}

TEST(Tweedie, UnitDeviance) {
  EXPECT_NEAR(tweedie_unit_deviance(2.0, 2.0, 1.5), 0.0, 1e-14);
  EXPECT_NEAR(tweedie_unit_deviance(0.0, 1.0, 1.5), 4.0, 1e-14);
  EXPECT_GT(tweedie_unit_deviance(0.3, 2.0, 1.7), 0.0);
  EXPECT_THROW(tweedie_unit_deviance(1.0, 1.0, 2.5), DomainError);
}

TEST(Tweedie, RejectsInvalidParameters) {
  EXPECT_THROW(tweedie_p0({1.0, 1.0, 1.0}), DomainError);
  EXPECT_THROW(tweedie_p0({-1.0, 1.0, 1.5}), DomainError);
  EXPECT_THROW(tweedie_cdf(-1.0, {1.0, 1.0, 1.5}), DomainError);
}
