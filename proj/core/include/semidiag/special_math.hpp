#pragma once

// Scalar special functions and distribution primitives.
//
// Every function here is pure and thread-safe. Invalid arguments raise
// semidiag::DomainError; series that fail to converge raise
// semidiag::EvaluationError.

#include <cstddef>

namespace semidiag::math {

/// Shape/scale gamma distribution; mean = shape * scale.
struct GammaParams {
  double shape;
  double scale;
};

/// Generalized beta of the second kind with density
/// a y^{ap-1} / (b^{ap} B(p,q) (1 + (y/b)^a)^{p+q}).
struct GB2Params {
  double a;
  double b;
  double p;
  double q;
};

/// Tweedie distribution with Var(Y) = phi * mu^power, 1 < power < 2.
struct TweedieParams {
  double mu;
  double phi;
  double power;
};

/// Compound Poisson-gamma representation of a Tweedie law:
/// Y = sum_{k=1}^{N} G_k, N ~ Poisson(lambda), G_k ~ Gamma(jump_shape, jump_scale).
struct CpgDerived {
  double lambda;
  double jump_shape;
  double jump_scale;
};

void validate(const GammaParams& params);
void validate(const GB2Params& params);
void validate(const TweedieParams& params);

CpgDerived to_compound_poisson(const TweedieParams& params);

// --- elementary special functions -----------------------------------------

double log_gamma(double x);
double digamma(double x);
double log_beta(double a, double b);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

// --- normal ------------------------------------------------------------------

double normal_pdf(double z);
double normal_logpdf(double z);
double normal_cdf(double z);
/// log Phi(z), accurate far into the lower tail.
double normal_logcdf(double z);
double normal_quantile(double u);

// --- gamma -------------------------------------------------------------------

double gamma_cdf(double y, const GammaParams& params);
double gamma_logpdf(double y, const GammaParams& params);
double gamma_quantile(double u, const GammaParams& params);

// --- GB2 -----------------------------------------------------------------------

double gb2_cdf(double y, const GB2Params& params);
double gb2_logpdf(double y, const GB2Params& params);
/// Inverse of gb2_cdf by bisection on the incomplete-beta argument.
double gb2_quantile(double u, const GB2Params& params);

// --- Tweedie -------------------------------------------------------------------

/// Summation window actually used by a series evaluation.
struct SeriesWindow {
  long first = 0;
  long last = 0;
  long terms() const { return last - first + 1; }
};

double tweedie_p0(const TweedieParams& params);
double tweedie_cdf(double y, const TweedieParams& params);
double tweedie_logpdf(double y, const TweedieParams& params);

/// tweedie_logpdf that also reports the window it summed over.
double tweedie_logpdf(double y, const TweedieParams& params, SeriesWindow& window);
/// tweedie_cdf that also reports the window it summed over.
double tweedie_cdf(double y, const TweedieParams& params, SeriesWindow& window);

/// Log density summed over an explicit index window [first, last], k >= 1.
double tweedie_logpdf_fixed(double y, const TweedieParams& params, SeriesWindow window);

/// Tweedie unit deviance d(y, mu) for 1 < power < 2, y >= 0.
double tweedie_unit_deviance(double y, double mu, double power);

/// Index of the dominant density term, y^{2-p} / (phi (2-p)).
double tweedie_series_center(double y, const TweedieParams& params);

inline constexpr long kTweedieMaxTerms = 100000;
inline constexpr double kTweedieRelTol = 1e-12;

}  // namespace semidiag::math
