#include "semidiag/special_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "semidiag/error.hpp"

namespace semidiag::math {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

[[noreturn]] void domain(const std::string& what) { throw DomainError(what); }

// Power series for P(a, x); valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
  }
  throw EvaluationError("gamma_p series did not converge for a=" + std::to_string(a) +
                        " x=" + std::to_string(x));
}

// Lentz continued fraction for Q(a, x); valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
    }
  }
  throw EvaluationError("gamma_q continued fraction did not converge for a=" +
                        std::to_string(a) + " x=" + std::to_string(x));
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw EvaluationError("incomplete beta continued fraction did not converge for a=" +
                        std::to_string(a) + " b=" + std::to_string(b));
}

// I_x(a, b) given both x and its complement, so callers near x = 1 keep precision.
double beta_inc_split(double a, double b, double x, double xc) {
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log(xc) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_fraction(b, a, xc) / b;
}

double logistic(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

double log_sum_exp_step(double acc, double term) {
  if (acc == -std::numeric_limits<double>::infinity()) return term;
  const double hi = std::max(acc, term);
  return hi + std::log1p(std::exp(std::min(acc, term) - hi));
}

// Log of the k-th density term, Poisson(k; lambda) * Gamma(y; k alpha, theta).
struct DensityTerms {
  double log_lambda;
  double lambda;
  double alpha;
  double log_y;
  double y_over_theta;
  double log_theta;

  double operator()(long k) const {
    const double ka = static_cast<double>(k) * alpha;
    return k * log_lambda - lambda - log_gamma(k + 1.0) + (ka - 1.0) * log_y -
           y_over_theta - ka * log_theta - log_gamma(ka);
  }
};

DensityTerms density_terms(double y, const TweedieParams& params) {
  const CpgDerived cpg = to_compound_poisson(params);
  return DensityTerms{std::log(cpg.lambda), cpg.lambda, cpg.jump_shape, std::log(y),
                      y / cpg.jump_scale, std::log(cpg.jump_scale)};
}

[[noreturn]] void series_cap(const char* which, double y, const TweedieParams& params,
                             long first, long last) {
  std::ostringstream os;
  os.precision(17);
  os << which << " series exceeded " << kTweedieMaxTerms << " terms (y=" << y
     << ", mu=" << params.mu << ", phi=" << params.phi << ", power=" << params.power
     << ", window=[" << first << "," << last << "])";
  throw EvaluationError(os.str());
}

// Sums exp(term(k)) for k >= 1 over a unimodal sequence, expanding both ways
// from the mode until terms drop below kTweedieRelTol of the running sum.
// Returns (log of max term, linear sum relative to max).
template <typename Term>
std::pair<double, double> sum_unimodal(const Term& term, long start, SeriesWindow& window,
                                       const char* which, double y,
                                       const TweedieParams& params) {
  long mode = std::max(1L, start);
  double t_mode = term(mode);
  // walk uphill to the mode; the start is only an estimate
  for (long steps = 0;; ++steps) {
    if (steps > kTweedieMaxTerms) series_cap(which, y, params, mode, mode);
    const double up = term(mode + 1);
    if (up > t_mode) {
      ++mode;
      t_mode = up;
      continue;
    }
    if (mode > 1) {
      const double down = term(mode - 1);
      if (down > t_mode) {
        --mode;
        t_mode = down;
        continue;
      }
    }
    break;
  }
  if (!std::isfinite(t_mode)) {
    window = {mode, mode};
    return {t_mode, t_mode == -std::numeric_limits<double>::infinity() ? 0.0 : 1.0};
  }
  double sum = 1.0;
  long hi = mode;
  long lo = mode;
  for (;;) {
    if (hi - lo + 1 > kTweedieMaxTerms) series_cap(which, y, params, lo, hi);
    const double r = std::exp(term(hi + 1) - t_mode);
    ++hi;
    sum += r;
    if (r < kTweedieRelTol * sum) break;
  }
  while (lo > 1) {
    if (hi - lo + 1 > kTweedieMaxTerms) series_cap(which, y, params, lo, hi);
    const double r = std::exp(term(lo - 1) - t_mode);
    --lo;
    sum += r;
    if (r < kTweedieRelTol * sum) break;
  }
  window = {lo, hi};
  return {t_mode, sum};
}

}  // namespace

void validate(const GammaParams& params) {
  if (!(params.shape > 0.0) || !(params.scale > 0.0) || !std::isfinite(params.shape) ||
      !std::isfinite(params.scale)) {
    domain("gamma parameters must be positive and finite");
  }
}

void validate(const GB2Params& params) {
  for (double v : {params.a, params.b, params.p, params.q}) {
    if (!(v > 0.0) || !std::isfinite(v)) domain("GB2 parameters must be positive and finite");
  }
}

void validate(const TweedieParams& params) {
  if (!(params.mu > 0.0) || !std::isfinite(params.mu)) domain("Tweedie mean must be positive");
  if (!(params.phi > 0.0) || !std::isfinite(params.phi)) {
    domain("Tweedie dispersion must be positive");
  }
  if (!(params.power > 1.0 && params.power < 2.0)) {
    domain("Tweedie power must lie in (1, 2)");
  }
}

CpgDerived to_compound_poisson(const TweedieParams& params) {
  validate(params);
  const double p = params.power;
  return CpgDerived{std::pow(params.mu, 2.0 - p) / (params.phi * (2.0 - p)),
                    (2.0 - p) / (p - 1.0),
                    params.phi * (p - 1.0) * std::pow(params.mu, p - 1.0)};
}

double log_gamma(double x) {
  if (!(x > 0.0)) domain("log_gamma requires x > 0");
  if (std::isinf(x)) return x;
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double digamma(double x) {
  if (!(x > 0.0)) domain("digamma requires x > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132)))));
  return result;
}

double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double gamma_p(double a, double x) {
  if (!(a > 0.0)) domain("gamma_p requires a > 0");
  if (!(x >= 0.0)) domain("gamma_p requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) domain("gamma_q requires a > 0");
  if (!(x >= 0.0)) domain("gamma_q requires x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) domain("beta_inc requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) domain("beta_inc requires 0 <= x <= 1");
  return beta_inc_split(a, b, x, 1.0 - x);
}

double normal_pdf(double z) { return std::exp(normal_logpdf(z)); }

double normal_logpdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double normal_cdf(double z) {
  if (std::isnan(z)) return z;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_logcdf(double z) {
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -35.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // Mills-ratio asymptotic expansion
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return normal_logpdf(z) - std::log(-z) + std::log(series);
}

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) domain("normal_quantile requires 0 < u < 1");
  // Acklam's rational approximation, refined by one Halley step below.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (u < low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Work in the tail nearer to x so the residual is computed without cancellation.
  const double e = x <= 0.0 ? normal_cdf(x) - u : (1.0 - u) - normal_cdf(-x);
  const double v = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - v / (1.0 + 0.5 * x * v);
}

double gamma_cdf(double y, const GammaParams& params) {
  validate(params);
  if (!(y >= 0.0)) domain("gamma_cdf requires y >= 0");
  return gamma_p(params.shape, y / params.scale);
}

double gamma_logpdf(double y, const GammaParams& params) {
  validate(params);
  if (!(y > 0.0)) domain("gamma_logpdf requires y > 0");
  const double z = y / params.scale;
  return (params.shape - 1.0) * std::log(z) - z - log_gamma(params.shape) -
         std::log(params.scale);
}

double gamma_quantile(double u, const GammaParams& params) {
  validate(params);
  if (!(u >= 0.0 && u < 1.0)) domain("gamma_quantile requires 0 <= u < 1");
  if (u == 0.0) return 0.0;
  const double a = params.shape;
  // Wilson-Hilferty starting point, in units of the scale.
  const double z = normal_quantile(u);
  double x = a * std::pow(1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a)), 3);
  if (!(x > 0.0) || !std::isfinite(x)) x = std::pow(u * std::exp(log_gamma(a + 1.0)), 1.0 / a);
  if (!(x > 0.0) || !std::isfinite(x)) x = a;

  double lo = 0.0;
  double hi = std::max(x, a);
  while (gamma_p(a, hi) < u) {
    lo = hi;
    hi *= 2.0;
  }
  x = std::clamp(x, lo, hi);
  for (int it = 0; it < 500; ++it) {
    const double f = gamma_p(a, x) - u;
    if (f == 0.0) break;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double log_dens = (a - 1.0) * std::log(x) - x - log_gamma(a);
    double next = x - f / std::exp(log_dens);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 4.0 * kEps * x || hi - lo <= 4.0 * kEps * hi) {
      x = next;
      break;
    }
    x = next;
  }
  return x * params.scale;
}

double gb2_cdf(double y, const GB2Params& params) {
  validate(params);
  if (!(y >= 0.0)) domain("gb2_cdf requires y >= 0");
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return 1.0;
  const double t = params.a * (std::log(y) - std::log(params.b));
  return beta_inc_split(params.p, params.q, logistic(t), logistic(-t));
}

double gb2_logpdf(double y, const GB2Params& params) {
  validate(params);
  if (!(y > 0.0)) domain("gb2_logpdf requires y > 0");
  const double t = params.a * (std::log(y) - std::log(params.b));
  const double softplus = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  return std::log(params.a) - std::log(y) + params.p * t - log_beta(params.p, params.q) -
         (params.p + params.q) * softplus;
}

double gb2_quantile(double u, const GB2Params& params) {
  validate(params);
  if (!(u >= 0.0 && u < 1.0)) domain("gb2_quantile requires 0 <= u < 1");
  if (u == 0.0) return 0.0;
  // bisection on t = a log(y / b), where the incomplete-beta argument is logistic(t)
  double lo = -745.0;
  double hi = 745.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::fabs(lo + hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (beta_inc_split(params.p, params.q, logistic(mid), logistic(-mid)) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return params.b * std::exp(0.5 * (lo + hi) / params.a);
}

double tweedie_p0(const TweedieParams& params) {
  return std::exp(-to_compound_poisson(params).lambda);
}

double tweedie_series_center(double y, const TweedieParams& params) {
  return std::pow(y, 2.0 - params.power) / (params.phi * (2.0 - params.power));
}

double tweedie_logpdf(double y, const TweedieParams& params, SeriesWindow& window) {
  validate(params);
  if (!(y > 0.0) || !std::isfinite(y)) domain("tweedie_logpdf requires finite y > 0");
  const DensityTerms term = density_terms(y, params);
  const auto start = static_cast<long>(std::llround(
      std::min(tweedie_series_center(y, params), static_cast<double>(kTweedieMaxTerms))));
  const auto [t_max, sum] = sum_unimodal(term, start, window, "tweedie_logpdf", y, params);
  return t_max + std::log(sum);
}

double tweedie_logpdf(double y, const TweedieParams& params) {
  SeriesWindow window;
  return tweedie_logpdf(y, params, window);
}

double tweedie_logpdf_fixed(double y, const TweedieParams& params, SeriesWindow window) {
  validate(params);
  if (!(y > 0.0)) domain("tweedie_logpdf requires y > 0");
  if (window.first < 1 || window.last < window.first) domain("invalid series window");
  const DensityTerms term = density_terms(y, params);
  double acc = -std::numeric_limits<double>::infinity();
  for (long k = window.first; k <= window.last; ++k) acc = log_sum_exp_step(acc, term(k));
  return acc;
}

double tweedie_cdf(double y, const TweedieParams& params, SeriesWindow& window) {
  const CpgDerived cpg = to_compound_poisson(params);
  if (!(y >= 0.0)) domain("tweedie_cdf requires y >= 0");
  const double p0 = std::exp(-cpg.lambda);
  if (y == 0.0) {
    window = {0, -1};
    return p0;
  }
  if (std::isinf(y)) return 1.0;
  const double log_lambda = std::log(cpg.lambda);
  const double x = y / cpg.jump_scale;
  auto term = [&](long k) {
    const double prob = gamma_p(static_cast<double>(k) * cpg.jump_shape, x);
    if (prob <= 0.0) return -std::numeric_limits<double>::infinity();
    return k * log_lambda - cpg.lambda - log_gamma(k + 1.0) + std::log(prob);
  };
  // The product of the Poisson weight and a decreasing P(k alpha, x) peaks
  // at or below the Poisson mode, so start from the smaller of the two centers.
  const double center =
      std::min({tweedie_series_center(y, params), cpg.lambda, static_cast<double>(kTweedieMaxTerms)});
  const auto [t_max, sum] =
      sum_unimodal(term, static_cast<long>(std::llround(center)), window, "tweedie_cdf", y, params);
  if (sum == 0.0) return p0;
  return std::min(1.0, p0 + std::exp(t_max) * sum);
}

double tweedie_cdf(double y, const TweedieParams& params) {
  SeriesWindow window;
  return tweedie_cdf(y, params, window);
}

double tweedie_unit_deviance(double y, double mu, double power) {
  if (!(power > 1.0 && power < 2.0)) domain("Tweedie power must lie in (1, 2)");
  if (!(mu > 0.0)) domain("Tweedie deviance requires mu > 0");
  if (!(y >= 0.0)) domain("Tweedie deviance requires y >= 0");
  const double one_p = 1.0 - power;
  const double two_p = 2.0 - power;
  const double y_term = y > 0.0 ? std::pow(y, two_p) / (one_p * two_p) : 0.0;
  const double dev =
      2.0 * (y_term - y * std::pow(mu, one_p) / one_p + std::pow(mu, two_p) / two_p);
  return std::max(0.0, dev);
}

}  // namespace semidiag::math
