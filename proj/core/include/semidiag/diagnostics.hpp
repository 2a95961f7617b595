#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace semidiag::diagnostics {

enum class QQScale { uniform, normal };

std::string to_string(QQScale scale);

/// Sorted sample quantiles against Hazen plotting positions (i - 0.5) / n.
struct QQData {
  std::vector<double> theoretical;
  std::vector<double> sample;
  QQScale scale = QQScale::uniform;
};

QQData qq_against_uniform(std::span<const double> residuals);
QQData qq_against_normal(std::span<const double> transformed);

struct UniformityReport {
  double ks_statistic = 0.0;
  double ks_pvalue_asymptotic = 1.0;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  /// Always true for fitted residuals: parameters were estimated, so the
  /// Kolmogorov reference distribution is only approximate.
  bool parameters_estimated = true;
};

/// Exact one-sample KS distance to Uniform(0, 1) with the asymptotic
/// Kolmogorov p-value.
UniformityReport ks_uniform(std::span<const double> residuals);

/// P(K > t) for the Kolmogorov distribution, t = sqrt(n) * D.
double kolmogorov_survival(double t);

/// Fixed 600x600 SVG 1.1 scatter with a diagonal reference line.
std::string render_qq_svg(const QQData& qq, const std::string& title);

/// Two-column CSV with header `theoretical,sample`.
void write_qq_csv(std::ostream& out, const QQData& qq);

/// Counts over 20 equal-width bins on [0, 1]; the last bin is closed.
struct Histogram {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> count;
};

Histogram histogram_unit_interval(std::span<const double> values, std::size_t bins = 20);

/// CSV with header `bin_lower,bin_upper,count`.
void write_histogram_csv(std::ostream& out, const Histogram& histogram);

/// Key=value report lines.
void write_uniformity_report(std::ostream& out, const UniformityReport& report);

}  // namespace semidiag::diagnostics
