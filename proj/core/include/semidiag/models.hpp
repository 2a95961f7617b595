#pragma once

// Regression families for semicontinuous outcomes and the common contract
// the residual machinery relies on: p0(x) = P(Y = 0 | x) and F(y | x).

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "semidiag/dataset.hpp"

namespace semidiag::models {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;

struct FitReport {
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<Vec> coefficient_standard_errors;
  std::vector<std::string> warnings;
};

inline constexpr int kIrlsMaxIterations = 100;
inline constexpr double kIrlsRelTol = 1e-10;
inline constexpr double kGradientTol = 1e-6;
inline constexpr double kSeparationBound = 30.0;

// --- fitted model types -------------------------------------------------------

/// Gamma positive part: mean exp(x'beta), shape 1/dispersion.
struct GammaPart {
  Vec coef;
  double dispersion = 1.0;
};

/// GB2 positive part: scale b = exp(x'beta).
struct GB2Part {
  Vec coef;
  double a = 1.0;
  double p = 1.0;
  double q = 1.0;
};

struct TwoPartFit {
  Vec zero_coef;  // logistic, P(Y = 0 | x) = logit^{-1}(x'gamma)
  std::variant<GammaPart, GB2Part> positive;
};

struct TweedieFit {
  Vec coef;  // mu = exp(x'beta)
  double phi = 1.0;
  double power = 1.5;
};

struct TobitFit {
  Vec coef;  // latent mean x'beta
  double sigma = 1.0;
  double limit = 0.0;
};

using FittedModel = std::variant<TwoPartFit, TweedieFit, TobitFit>;

/// Short family tag: "twopart-gamma", "twopart-gb2", "tweedie" or "tobit".
std::string family_name(const FittedModel& model);

/// Number of covariate columns (including the intercept) the model expects.
Eigen::Index dimension(const FittedModel& model);

// --- contract -------------------------------------------------------------------

double predict_p0(const FittedModel& model, const VecRef& x);
double conditional_cdf(const FittedModel& model, double y, const VecRef& x);

/// predict_p0 for every design row.
Vec p0_values(const FittedModel& model, const Mat& design);
/// conditional_cdf at (y_i, row i) for every row.
Vec cdf_values(const FittedModel& model, const Vec& y, const Mat& design);

/// Mean and variance of Y | x where the family defines them in closed form
/// (Tweedie, gamma two-part). Used for Pearson residuals.
struct Moments {
  double mean;
  double variance;
};
std::optional<Moments> moments(const FittedModel& model, const VecRef& x);

// --- fitting ---------------------------------------------------------------------

struct LogisticResult {
  Vec coef;
  FitReport report;
};

/// Bernoulli log-likelihood maximized by IRLS; `is_zero` holds 0/1 targets.
LogisticResult fit_logistic(const Mat& design, const Vec& is_zero);

struct GammaGlmResult {
  Vec coef;
  double dispersion = 1.0;
  FitReport report;
};

/// Log-link gamma GLM; dispersion by the Pearson statistic over n - d.
GammaGlmResult fit_gamma_glm(const Mat& design, const Vec& y);

struct GB2Result {
  GB2Part part;
  FitReport report;
};

GB2Result fit_gb2(const Mat& design, const Vec& y);

struct TweedieGlmResult {
  Vec coef;
  double pearson_phi = 1.0;
  FitReport report;
};

/// Quasi-likelihood IRLS at a fixed power (log link, variance mu^power).
TweedieGlmResult fit_tweedie_glm(const Mat& design, const Vec& y, double power);

/// Exact log-likelihood of a Tweedie GLM evaluated with the series density.
double tweedie_log_likelihood(const Mat& design, const Vec& y, const Vec& coef, double phi,
                              double power);

struct ProfilePoint {
  double power;
  double phi;
  double log_likelihood;
};

struct TweedieOptions {
  double grid_lo = 1.10;
  double grid_hi = 1.90;
  double grid_step = 0.05;
  double refine_tol = 0.01;  // golden-section bracket width, i.e. +/- 0.005
  bool refine_phi = true;
};

struct TweedieResult {
  TweedieFit fit;
  FitReport report;
  std::vector<ProfilePoint> profile;
};

TweedieResult fit_tweedie(const Mat& design, const Vec& y, const TweedieOptions& options = {});

struct TobitResult {
  TobitFit fit;
  FitReport report;
};

/// Censored-normal maximum likelihood; responses <= limit are censored.
TobitResult fit_tobit(const Mat& design, const Vec& y, double limit = 0.0);

enum class PositiveFamily { gamma, gb2 };

struct TwoPartResult {
  TwoPartFit fit;
  FitReport zero_report;
  FitReport positive_report;
  double log_likelihood = 0.0;
};

/// Logistic zero part plus a gamma or GB2 positive part on the same covariates.
TwoPartResult fit_two_part(const Dataset& data, PositiveFamily family);

/// Two-part log-likelihood of a fitted model on data.
double two_part_log_likelihood(const TwoPartFit& fit, const Mat& design, const Vec& y);

// --- family dispatch ---------------------------------------------------------------

enum class ModelFamily { tweedie, twopart_gamma, twopart_gb2, tobit };

/// Parses "tweedie", "twopart-gamma", "twopart-gb2" or "tobit"; nullopt otherwise.
std::optional<ModelFamily> parse_family(const std::string& name);
std::string to_string(ModelFamily family);

struct FitOutcome {
  FittedModel model;
  FitReport report;  // whole-model log-likelihood; converged only if every part did
  std::vector<std::pair<std::string, FitReport>> components;
  std::vector<ProfilePoint> profile;  // Tweedie only
};

/// Fits the family on a validated dataset. `limit` applies to Tobit only.
FitOutcome fit_model(ModelFamily family, const Dataset& data, double limit = 0.0);

}  // namespace semidiag::models
