#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "semidiag/error.hpp"
#include "semidiag/residuals.hpp"
#include "semidiag/special_math.hpp"

using namespace semidiag;
using namespace semidiag::residuals;

namespace {

struct Instance {
  std::vector<double> p0;
  std::vector<double> cdf;
};

// Random (p0, F) pairs with F >= p0, about a third of them sitting exactly on p0.
Instance random_instance(std::mt19937_64& eng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = u(eng) * 0.98 + 0.01;
    in.p0.push_back(p);
    in.cdf.push_back(u(eng) < 0.33 ? p : p + (1.0 - p) * u(eng));
  }
  return in;
}

}  // namespace

TEST(HEstimator, WorkedExamples) {
  const std::vector<double> flat{0.5, 0.5, 0.5};
  EXPECT_EQ(build_h(flat)(0.7), 0.7);
  EXPECT_EQ(build_h(flat)(0.3), 0.0);
  EXPECT_EQ(build_h(flat)(0.5), 0.5);  // inclusive
  const std::vector<double> pool{0.1, 0.2, 0.9};
  EXPECT_EQ(build_h(pool)(0.5), oracle::h_literal(pool, 0.5));
  EXPECT_EQ(build_h(pool)(0.5), 0.5 * (2.0 / 3.0));
}

TEST(HEstimator, RejectsBadPools) {
  EXPECT_THROW(build_h(std::vector<double>{}), DomainError);
  EXPECT_THROW(build_h(std::vector<double>{0.2, 1.5}), DomainError);
  EXPECT_THROW(build_h(std::vector<double>{std::nan("")}), DomainError);
}

TEST(HEstimator, NondecreasingInS) {
  std::mt19937_64 eng(3);
  const Instance in = random_instance(eng, 40);
  const HEstimator h(in.p0);
  double prev = 0.0;
  for (double s = 0.0; s <= 1.0; s += 1e-3) {
    EXPECT_GE(h(s), prev);
    prev = h(s);
  }
}

TEST(ProposedResiduals, SinglePoint) {
  const auto rs = proposed_residuals(std::vector<double>{0.2}, std::vector<double>{0.5});
  EXPECT_EQ(rs.proposed[0], 0.5);
}

TEST(ProposedResiduals, UniqueMinimumZeroOutcome) {
  const std::vector<double> p0{0.1, 0.4, 0.6, 0.8};
  const std::vector<double> cdf{0.1, 0.9, 0.7, 0.95};
  EXPECT_EQ(proposed_residuals(p0, cdf).proposed[0], 0.1 * (1.0 / 4.0));
}

TEST(ProposedResiduals, MatchesBruteForceExactly) {
  std::mt19937_64 eng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance in = random_instance(eng, 1 + static_cast<std::size_t>(trial % 50));
    const ResidualSet rs = proposed_residuals(in.p0, in.cdf);
    const std::vector<double> expect = oracle::residuals_literal(in.p0, in.cdf);
    ASSERT_EQ(rs.proposed, expect) << "trial " << trial;
    const ResidualSet oos = out_of_sample_errors(in.p0, in.cdf);
    ASSERT_EQ(oos.proposed, expect);
  }
}

TEST(ProposedResiduals, SetInvariants) {
  std::mt19937_64 eng(5);
  const Instance in = random_instance(eng, 30);
  const ResidualSet rs = proposed_residuals(in.p0, in.cdf);
  ASSERT_EQ(rs.size(), 30u);
  ASSERT_EQ(rs.normal_scale.size(), 30u);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_LE(rs.proposed[i], rs.cdf_value[i]);
    EXPECT_GE(rs.proposed[i], rs.cdf_value[i] / 30.0);
    EXPECT_EQ(rs.p0_hat[i], in.p0[i]);
  }
}

TEST(ProposedResiduals, MonotoneInCdf) {
  std::mt19937_64 eng(8);
  const Instance in = random_instance(eng, 25);
  const ResidualSet rs = proposed_residuals(in.p0, in.cdf);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t j = 0; j < rs.size(); ++j) {
      if (in.cdf[i] <= in.cdf[j]) EXPECT_LE(rs.proposed[i], rs.proposed[j]);
    }
  }
}

TEST(ProposedResiduals, PermutationEquivariant) {
  std::mt19937_64 eng(21);
  const Instance in = random_instance(eng, 45);
  std::vector<std::size_t> perm(45);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), eng);
  Instance shuffled;
  for (std::size_t k : perm) {
    shuffled.p0.push_back(in.p0[k]);
    shuffled.cdf.push_back(in.cdf[k]);
  }
  const auto a = proposed_residuals(in.p0, in.cdf).proposed;
  const auto b = proposed_residuals(shuffled.p0, shuffled.cdf).proposed;
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(b[i], a[perm[i]]);
}

TEST(ProposedResiduals, ErrorsNameTheIndex) {
  try {
    proposed_residuals(std::vector<double>{0.2, 0.5}, std::vector<double>{0.3, 0.4});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
  EXPECT_THROW(proposed_residuals(std::vector<double>{0.2}, std::vector<double>{0.3, 0.4}),
               DataError);
}

TEST(OutOfSample, SingleHeldOutPoint) {
  const auto r = out_of_sample_errors(std::vector<double>{0.3}, std::vector<double>{0.3});
  EXPECT_EQ(r.proposed[0], 0.3);
}

TEST(OutOfSample, SevenPointBruteForce) {
  std::mt19937_64 eng(77);
  const Instance in = random_instance(eng, 7);
  EXPECT_EQ(out_of_sample_errors(in.p0, in.cdf).proposed, oracle::residuals_literal(in.p0, in.cdf));
}

TEST(NormalTransform, Examples) {
  const std::vector<double> mid{0.5, 0.2, 0.8};
  const auto z = normal_transform(mid);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_NEAR(z[1], -z[2], 1e-15);

  std::vector<double> zeros(100, 0.0);
  const double clamped = normal_transform(zeros)[0];
  // Bisection on the CDF as the oracle for Phi^{-1}(1/400).
  double lo = -10, hi = 0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (math::normal_cdf(m) < 1.0 / 400.0 ? lo : hi) = m;
  }
  EXPECT_NEAR(clamped, 0.5 * (lo + hi), 1e-12);
}

TEST(NormalTransform, Monotone) {
  std::vector<double> r;
  for (int i = 0; i <= 50; ++i) r.push_back(i / 50.0);
  const auto z = normal_transform(r);
  EXPECT_TRUE(std::is_sorted(z.begin(), z.end()));
  EXPECT_TRUE(std::isfinite(z.front()) && std::isfinite(z.back()));
}

TEST(Baselines, CoxSnellIsIdentity) {
  const std::vector<double> v{0.3, 0.1, 0.99, 1.0};
  EXPECT_EQ(cox_snell(v), v);
}

TEST(Baselines, Pearson) {
  const std::vector<double> y{1.0, 3.0, 0.0};
  const std::vector<double> mean{1.0, 2.0, 0.5};
  const std::vector<double> var{2.0, 1.0, 0.25};
  const auto r = pearson_residuals(y, mean, var);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 1.0);
  EXPECT_DOUBLE_EQ(r[2], -0.5 / 0.5);
  EXPECT_THROW(pearson_residuals(y, mean, std::vector<double>{1, 0, 1}), DomainError);
}

TEST(Baselines, TweedieDeviance) {
  const auto r = tweedie_deviance_residuals(std::vector<double>{0.0, 2.0},
                                            std::vector<double>{1.0, 2.0}, 1.0, 1.5);
  EXPECT_NEAR(r[0], -2.0, 1e-14);
  EXPECT_NEAR(r[1], 0.0, 1e-14);
  const auto up = tweedie_deviance_residuals(std::vector<double>{5.0},
                                             std::vector<double>{1.0}, 2.0, 1.3);
  EXPECT_GT(up[0], 0.0);
  EXPECT_THROW(tweedie_deviance_residuals(std::vector<double>{1.0}, std::vector<double>{1.0}, 1.0,
                                          1.0),
               DomainError);
}

TEST(Baselines, RandomizedQuantile) {
  const std::vector<double> p0{0.4, 0.4, 1.0};
  const std::vector<double> cdf{0.4, 0.7, 1.0};
  const std::vector<bool> zero{true, false, true};
  const auto a = randomized_quantile_residuals(p0, cdf, zero, 1);
  const auto b = randomized_quantile_residuals(p0, cdf, zero, 2);
  EXPECT_EQ(a[1], math::normal_quantile(0.7));
  EXPECT_EQ(a, randomized_quantile_residuals(p0, cdf, zero, 1));
  EXPECT_NE(a[0], b[0]);
  EXPECT_LT(a[0], math::normal_quantile(0.4));
  EXPECT_TRUE(std::isfinite(a[2]));
}
