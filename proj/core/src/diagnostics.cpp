#include "semidiag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

#include "semidiag/error.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::diagnostics {
namespace {

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_coord(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> hazen_positions(std::size_t n) {
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  }
  return pos;
}

}  // namespace

std::string to_string(QQScale scale) { return scale == QQScale::uniform ? "uniform" : "normal"; }

QQData qq_against_uniform(std::span<const double> residuals) {
  if (residuals.size() < 2) throw DomainError("QQ data needs at least two points");
  QQData qq;
  qq.scale = QQScale::uniform;
  qq.theoretical = hazen_positions(residuals.size());
  qq.sample.assign(residuals.begin(), residuals.end());
  std::sort(qq.sample.begin(), qq.sample.end());
  return qq;
}

QQData qq_against_normal(std::span<const double> transformed) {
  if (transformed.size() < 2) throw DomainError("QQ data needs at least two points");
  QQData qq;
  qq.scale = QQScale::normal;
  qq.theoretical = hazen_positions(transformed.size());
  for (double& t : qq.theoretical) t = math::normal_quantile(t);
  qq.sample.assign(transformed.begin(), transformed.end());
  std::sort(qq.sample.begin(), qq.sample.end());
  return qq;
}

double kolmogorov_survival(double t) {
  if (!(t > 0.0)) return 1.0;
  if (t < 1.0) {
    // Jacobi-theta form converges fast for small t.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * t * t));
      sum += term;
      if (term < 1e-12 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / t * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

UniformityReport ks_uniform(std::span<const double> residuals) {
  if (residuals.empty()) throw DomainError("KS statistic needs at least one value");
  std::vector<double> sorted(residuals.begin(), residuals.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i] >= 0.0 && sorted[i] <= 1.0)) {
      throw DomainError("residual at index " + std::to_string(i) + " lies outside [0, 1]");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double r = sorted[i];
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - r, r - static_cast<double>(i) / n});
    sum += r;
  }
  UniformityReport report;
  report.n = sorted.size();
  report.ks_statistic = d;
  report.ks_pvalue_asymptotic = kolmogorov_survival(std::sqrt(n) * d);
  report.mean = sum / n;
  double ss = 0.0;
  for (double r : sorted) ss += (r - report.mean) * (r - report.mean);
  report.sd = sorted.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return report;
}

std::string render_qq_svg(const QQData& qq, const std::string& title) {
  constexpr double kSize = 600.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 30.0;
  constexpr double kTop = 50.0;
  constexpr double kBottom = 60.0;
  const double plot_w = kSize - kLeft - kRight;
  const double plot_h = kSize - kTop - kBottom;

  double lo = 0.0;
  double hi = 1.0;
  if (qq.scale == QQScale::normal) {
    double extent = 1.0;
    for (double v : qq.theoretical) extent = std::max(extent, std::fabs(v));
    for (double v : qq.sample) {
      if (std::isfinite(v)) extent = std::max(extent, std::fabs(v));
    }
    extent = std::ceil(extent);
    lo = -extent;
    hi = extent;
  }
  const auto px = [&](double v) { return kLeft + (v - lo) / (hi - lo) * plot_w; };
  const auto py = [&](double v) { return kTop + plot_h - (v - lo) / (hi - lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" "
         "viewBox=\"0 0 600 600\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\"/>\n"
      << "<rect x=\"" << fmt_coord(kLeft) << "\" y=\"" << fmt_coord(kTop) << "\" width=\""
      << fmt_coord(plot_w) << "\" height=\"" << fmt_coord(plot_h)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n"
      << "<text x=\"300\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << xml_escape(title) << "</text>\n";

  const int ticks = 4;
  for (int k = 0; k <= ticks; ++k) {
    const double v = lo + (hi - lo) * k / ticks;
    svg << "<text x=\"" << fmt_coord(px(v)) << "\" y=\"" << fmt_coord(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_coord(v) << "</text>\n";
    svg << "<text x=\"" << fmt_coord(kLeft - 8) << "\" y=\"" << fmt_coord(py(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_coord(v)
        << "</text>\n";
  }
  const std::string scale = to_string(qq.scale);
  svg << "<text x=\"" << fmt_coord(kLeft + plot_w / 2) << "\" y=\"" << fmt_coord(kSize - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">Theoretical "
      << scale << " quantiles</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt_coord(kTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << fmt_coord(kTop + plot_h / 2) << ")\">Sample quantiles</text>\n";

  svg << "<line class=\"reference\" x1=\"" << fmt_coord(px(lo)) << "\" y1=\"" << fmt_coord(py(lo))
      << "\" x2=\"" << fmt_coord(px(hi)) << "\" y2=\"" << fmt_coord(py(hi))
      << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
  for (std::size_t i = 0; i < qq.sample.size(); ++i) {
    const double s = std::clamp(qq.sample[i], lo, hi);
    svg << "<circle cx=\"" << fmt_coord(px(qq.theoretical[i])) << "\" cy=\"" << fmt_coord(py(s))
        << "\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_qq_csv(std::ostream& out, const QQData& qq) {
  out << "theoretical,sample\n";
  for (std::size_t i = 0; i < qq.sample.size(); ++i) {
    out << fmt_full(qq.theoretical[i]) << ',' << fmt_full(qq.sample[i]) << '\n';
  }
}

Histogram histogram_unit_interval(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw DomainError("histogram needs at least one bin");
  Histogram h;
  h.count.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) {
    h.lower.push_back(static_cast<double>(b) / static_cast<double>(bins));
    h.upper.push_back(static_cast<double>(b + 1) / static_cast<double>(bins));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("histogram value at index " + std::to_string(i) + " outside [0, 1]");
    }
    const auto b = std::min(bins - 1, static_cast<std::size_t>(v * static_cast<double>(bins)));
    ++h.count[b];
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& histogram) {
  out << "bin_lower,bin_upper,count\n";
  for (std::size_t b = 0; b < histogram.count.size(); ++b) {
    out << fmt_full(histogram.lower[b]) << ',' << fmt_full(histogram.upper[b]) << ','
        << histogram.count[b] << '\n';
  }
}

void write_uniformity_report(std::ostream& out, const UniformityReport& report) {
  out << "n=" << report.n << '\n'
      << "ks_statistic=" << fmt_full(report.ks_statistic) << '\n'
      << "ks_pvalue_asymptotic=" << fmt_full(report.ks_pvalue_asymptotic) << '\n'
      << "mean=" << fmt_full(report.mean) << '\n'
      << "sd=" << fmt_full(report.sd) << '\n'
      << "parameters_estimated=" << (report.parameters_estimated ? "true" : "false") << '\n';
}

}  // namespace semidiag::diagnostics
