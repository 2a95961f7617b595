#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "semidiag/diagnostics.hpp"
#include "semidiag/error.hpp"
#include "semidiag/residuals.hpp"
#include "semidiag/special_math.hpp"

using namespace semidiag;
using namespace semidiag::diagnostics;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Direct sup over a fine grid plus both sides of every jump.
double ks_by_ecdf(std::vector<double> r) {
  std::sort(r.begin(), r.end());
  const double n = static_cast<double>(r.size());
  double d = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double below = static_cast<double>(std::lower_bound(r.begin(), r.end(), r[i]) - r.begin()) / n;
    const double at = static_cast<double>(std::upper_bound(r.begin(), r.end(), r[i]) - r.begin()) / n;
    d = std::max({d, std::abs(at - r[i]), std::abs(below - r[i])});
  }
  return d;
}

}  // namespace

TEST(QQ, UniformTwoPoints) {
  const QQData qq = qq_against_uniform(std::vector<double>{0.75, 0.25});
  EXPECT_EQ(qq.theoretical, (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(qq.sample, (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(qq.scale, QQScale::uniform);
}

TEST(QQ, UniformGridIsOnDiagonal) {
  std::vector<double> grid;
  for (int i = 1; i <= 13; ++i) grid.push_back((i - 0.5) / 13.0);
  const QQData qq = qq_against_uniform(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_DOUBLE_EQ(qq.sample[i], qq.theoretical[i]);
}

TEST(QQ, SortedAgainstNaiveSort) {
  std::mt19937_64 eng(4);
  std::uniform_real_distribution<double> u;
  std::vector<double> r(37);
  for (auto& v : r) v = u(eng);
  std::vector<double> sorted = r;
  // insertion sort as the oracle
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    for (std::size_t j = i; j > 0 && sorted[j - 1] > sorted[j]; --j) std::swap(sorted[j - 1], sorted[j]);
  }
  EXPECT_EQ(qq_against_uniform(r).sample, sorted);
}

TEST(QQ, NormalTwoPointsSymmetric) {
  const QQData qq = qq_against_normal(std::vector<double>{1.0, -1.0});
  EXPECT_DOUBLE_EQ(qq.theoretical[0], math::normal_quantile(0.25));
  EXPECT_NEAR(qq.theoretical[0], -qq.theoretical[1], 1e-15);
  EXPECT_EQ(qq.scale, QQScale::normal);
}

TEST(QQ, NormalIsUniformComposedWithQuantile) {
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<double> r(9);
  for (auto& v : r) v = u(eng);
  const QQData uni = qq_against_uniform(r);
  const QQData nor = qq_against_normal(residuals::normal_transform(r));
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(nor.theoretical[i], math::normal_quantile(uni.theoretical[i]), 1e-15);
    EXPECT_NEAR(nor.sample[i], math::normal_quantile(uni.sample[i]), 1e-15);
  }
}

TEST(QQ, NeedsTwoPoints) {
  EXPECT_THROW(qq_against_uniform(std::vector<double>{0.5}), DomainError);
  EXPECT_THROW(qq_against_normal(std::vector<double>{0.5}), DomainError);
}

TEST(KS, GridClosedForm) {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back((i - 0.5) / 20.0);
  EXPECT_NEAR(ks_uniform(grid).ks_statistic, 1.0 / 40.0, 1e-15);
}

TEST(KS, AllAtHalf) {
  const std::vector<double> r(4, 0.5);
  EXPECT_DOUBLE_EQ(ks_uniform(r).ks_statistic, ks_by_ecdf(r));
  EXPECT_DOUBLE_EQ(ks_uniform(r).ks_statistic, 0.5);
}

TEST(KS, MatchesEcdfOracleAndIsPermutationInvariant) {
  std::mt19937_64 eng(12);
  std::uniform_real_distribution<double> u;
  std::vector<double> r(60);
  for (auto& v : r) v = u(eng) * u(eng);
  const double d = ks_uniform(r).ks_statistic;
  EXPECT_NEAR(d, ks_by_ecdf(r), 1e-15);
  std::shuffle(r.begin(), r.end(), eng);
  EXPECT_EQ(ks_uniform(r).ks_statistic, d);
}

TEST(KS, ReportFields) {
  const auto rep = ks_uniform(std::vector<double>{0.1, 0.3, 0.8});
  EXPECT_EQ(rep.n, 3u);
  EXPECT_NEAR(rep.mean, 0.4, 1e-15);
  EXPECT_TRUE(rep.parameters_estimated);
  EXPECT_THROW(ks_uniform(std::vector<double>{0.2, 1.2}), DomainError);
}

TEST(KS, PValueMonotone) {
  double prev = 1.0;
  for (double t = 0.05; t < 3.0; t += 0.05) {
    const double p = kolmogorov_survival(t);
    EXPECT_LE(p, prev + 1e-15);
    EXPECT_GE(p, 0.0);
    prev = p;
  }
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-4);
}

TEST(KS, UniformDrawsRarelyRejected) {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u;
  int small = 0;
  const int reps = 300;
  std::vector<double> r(10000);
  for (int k = 0; k < reps; ++k) {
    for (auto& v : r) v = u(eng);
    if (ks_uniform(r).ks_pvalue_asymptotic <= 0.001) ++small;
  }
  EXPECT_LE(small, reps / 100);
}

TEST(Svg, Structure) {
  const std::string svg = render_qq_svg(qq_against_uniform(std::vector<double>{0.2, 0.7}), "two");
  EXPECT_EQ(count_of(svg, "<circle"), 2u);
  EXPECT_EQ(count_of(svg, "class=\"reference\""), 1u);
  EXPECT_NE(svg.find("width=\"600\" height=\"600\""), std::string::npos);
  EXPECT_NE(svg.find("Theoretical uniform quantiles"), std::string::npos);
  EXPECT_EQ(svg, render_qq_svg(qq_against_uniform(std::vector<double>{0.2, 0.7}), "two"));
}

TEST(Svg, TitleIsEscaped) {
  const std::string svg = render_qq_svg(qq_against_uniform(std::vector<double>{0.2, 0.7}), "a<b&c");
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
}

TEST(Svg, GoldenTwentyPoints) {
  std::vector<double> r;
  for (int i = 0; i < 20; ++i) r.push_back(std::fmod(0.37 * i + 0.11, 1.0));
  const std::string svg = render_qq_svg(qq_against_uniform(r), "golden");
  const std::string path = std::string(SEMIDIAG_GOLDEN_DIR) + "/qq20.svg";
  if (std::getenv("SEMIDIAG_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << svg;
  }
  std::ifstream in(path, std::ios::binary);
  ASSERT_TRUE(in) << "missing golden file " << path;
  std::stringstream golden;
  golden << in.rdbuf();
  EXPECT_EQ(svg, golden.str());
}

TEST(Histogram, TwentyBins) {
  const Histogram h = histogram_unit_interval(std::vector<double>{0.0, 0.04, 0.05, 0.5, 1.0});
  ASSERT_EQ(h.count.size(), 20u);
  EXPECT_EQ(h.count[0], 2u);
  EXPECT_EQ(h.count[1], 1u);
  EXPECT_EQ(h.count[10], 1u);
  EXPECT_EQ(h.count[19], 1u);
  std::ostringstream csv;
  write_histogram_csv(csv, h);
  EXPECT_EQ(csv.str().substr(0, 26), "bin_lower,bin_upper,count\n");
}

TEST(QQCsv, Header) {
  std::ostringstream csv;
  write_qq_csv(csv, qq_against_uniform(std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(csv.str(), "theoretical,sample\n0.25,0.25\n0.75,0.75\n");
}
