// IRLS fits: logistic zero part, gamma positive part and the fixed-power
// Tweedie quasi-likelihood GLM. All three share the log-link machinery below.

#include <algorithm>
#include <cmath>
#include <string>

#include "semidiag/error.hpp"
#include "semidiag/models.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::models {
namespace {

constexpr double kEtaCap = 700.0;

double sup_norm(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double inv_logit(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

bool has_intercept(const Mat& design) {
  return design.cols() > 0 && (design.col(0).array() == 1.0).all();
}

void check_shapes(const Mat& design, const Vec& y) {
  if (design.rows() != y.size()) {
    throw DataError("design rows (" + std::to_string(design.rows()) +
                    ") differ from response length (" + std::to_string(y.size()) + ")");
  }
  if (design.rows() < design.cols()) throw DataError("fewer observations than columns");
}

Vec solve_spd(const Mat& info, const Vec& rhs) {
  Eigen::LLT<Mat> llt(info);
  if (llt.info() != Eigen::Success) throw LinAlgError("information matrix is not positive definite");
  return llt.solve(rhs);
}

Vec standard_errors(const Mat& info, double scale) {
  Eigen::LLT<Mat> llt(info);
  if (llt.info() != Eigen::Success) return Vec::Constant(info.rows(), std::nan(""));
  const Mat inv = llt.solve(Mat::Identity(info.rows(), info.cols()));
  return (scale * inv.diagonal()).cwiseSqrt();
}

// Quasi-likelihood for log link with variance mu^v (1 < v <= 2).
double quasi_loglik(const Vec& y, const Vec& eta, double v) {
  double q = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = std::exp(eta[i]);
    if (v == 2.0) {
      q += -y[i] / mu - eta[i];
    } else {
      q += y[i] * std::pow(mu, 1.0 - v) / (1.0 - v) - std::pow(mu, 2.0 - v) / (2.0 - v);
    }
  }
  return q;
}

struct LogLinkResult {
  Vec coef;
  Mat information;  // X' W X at the solution
  FitReport report;
};

// Fisher scoring for log link with variance function mu^v. Weights mu^{2-v},
// working score X' (y - mu) mu^{1-v}.
LogLinkResult irls_log_link(const Mat& design, const Vec& y, double v, const char* label) {
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  const double ybar = y.mean();
  if (!(ybar > 0.0)) throw DataError(std::string(label) + ": response mean must be positive");

  Vec beta = design.colPivHouseholderQr().solve(Vec::Constant(n, std::log(ybar)));
  if (has_intercept(design)) {
    beta.setZero();
    beta[0] = std::log(ybar);
  }
  Vec eta = (design * beta).cwiseMin(kEtaCap).cwiseMax(-kEtaCap);
  double q = quasi_loglik(y, eta, v);

  LogLinkResult out;
  Vec score(d);
  Mat info(d, d);
  auto score_and_info = [&](const Vec& eta_now) {
    Vec resid(n);
    Vec w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = std::exp(eta_now[i]);
      resid[i] = (y[i] - mu) * std::pow(mu, 1.0 - v);
      w[i] = std::pow(mu, 2.0 - v);
    }
    score = design.transpose() * resid;
    info = design.transpose() * w.asDiagonal() * design;
  };
  score_and_info(eta);

  int it = 0;
  bool converged = false;
  for (it = 1; it <= kIrlsMaxIterations; ++it) {
    const Vec delta = solve_spd(info, score);
    double step = 1.0;
    Vec beta_new;
    Vec eta_new;
    double q_new = q;
    for (int half = 0; half < 40; ++half) {
      beta_new = beta + step * delta;
      eta_new = (design * beta_new).cwiseMin(kEtaCap).cwiseMax(-kEtaCap);
      q_new = quasi_loglik(y, eta_new, v);
      if (std::isfinite(q_new) && q_new >= q - 1e-12 * std::fabs(q)) break;
      step *= 0.5;
    }
    const double rel = std::fabs(q_new - q) / (std::fabs(q_new) + 0.1);
    const double step_norm = sup_norm(beta_new - beta);
    beta = beta_new;
    eta = eta_new;
    q = q_new;
    score_and_info(eta);
    if (rel < kIrlsRelTol && (sup_norm(score) <= 1e-8 || step_norm < 1e-12)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw FitError(std::string(label) + ": IRLS did not converge in " +
                   std::to_string(kIrlsMaxIterations) + " iterations (last score norm " +
                   std::to_string(sup_norm(score)) + ")");
  }
  out.coef = beta;
  out.information = info;
  out.report.iterations = std::min(it, kIrlsMaxIterations);
  out.report.converged = true;
  out.report.log_likelihood = q;
  return out;
}

}  // namespace

LogisticResult fit_logistic(const Mat& design, const Vec& is_zero) {
  check_shapes(design, is_zero);
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_zero[i] != 0.0 && is_zero[i] != 1.0) {
      throw DataError("logistic target must be 0/1 at index " + std::to_string(i));
    }
  }
  const double frac = is_zero.mean();
  if (frac == 0.0 || frac == 1.0) throw DataError("logistic target is constant");
  require_full_rank(design);

  Vec beta = Vec::Zero(d);
  if (has_intercept(design)) beta[0] = std::log(frac / (1.0 - frac));

  Vec score(d);
  Mat info(d, d);
  auto evaluate = [&](const Vec& b, bool with_derivatives) {
    const Vec eta = design * b;
    double ll = 0.0;
    Vec resid(n);
    Vec w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      ll += is_zero[i] * eta[i] - softplus(eta[i]);
      const double p = inv_logit(eta[i]);
      resid[i] = is_zero[i] - p;
      w[i] = p * (1.0 - p);
    }
    if (with_derivatives) {
      score = design.transpose() * resid;
      info = design.transpose() * w.asDiagonal() * design;
    }
    return ll;
  };

  double ll = evaluate(beta, true);
  LogisticResult out;
  bool converged = false;
  int it = 1;
  for (; it <= kIrlsMaxIterations; ++it) {
    const Vec delta = solve_spd(info, score);
    double step = 1.0;
    Vec beta_new;
    double ll_new = ll;
    for (int half = 0; half < 40; ++half) {
      beta_new = beta + step * delta;
      ll_new = evaluate(beta_new, false);
      if (ll_new >= ll - 1e-12 * std::fabs(ll)) break;
      step *= 0.5;
    }
    const double rel = std::fabs(ll_new - ll) / (std::fabs(ll_new) + 0.1);
    const double step_norm = sup_norm(beta_new - beta);
    beta = beta_new;
    ll = evaluate(beta, true);
    if (sup_norm(beta) > kSeparationBound) {
      throw SeparationError("logistic coefficients diverge (|coef| > " +
                            std::to_string(kSeparationBound) +
                            "); the zero indicator is separable by the covariates");
    }
    if (rel < kIrlsRelTol && (sup_norm(score) <= 1e-8 || step_norm < 1e-12)) {
      converged = true;
      break;
    }
  }
  // Complete separation can also stop with moderate coefficients once every
  // fitted probability saturates.
  const Vec fitted = (design * beta).unaryExpr([](double t) { return inv_logit(t); });
  if ((is_zero - fitted).cwiseAbs().maxCoeff() < 1e-6) {
    throw SeparationError("every fitted zero probability is numerically 0 or 1; the zero "
                          "indicator is separable by the covariates");
  }
  if (!converged) {
    throw FitError("logistic IRLS did not converge in " + std::to_string(kIrlsMaxIterations) +
                   " iterations");
  }
  out.coef = beta;
  out.report.log_likelihood = ll;
  out.report.iterations = it;
  out.report.converged = true;
  out.report.coefficient_standard_errors = standard_errors(info, 1.0);
  return out;
}

GammaGlmResult fit_gamma_glm(const Mat& design, const Vec& y) {
  check_shapes(design, y);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw DataError("gamma GLM requires positive responses (index " +
                                       std::to_string(i) + ")");
  }
  require_full_rank(design);
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  LogLinkResult fit = irls_log_link(design, y, 2.0, "gamma GLM");

  const Vec mu = (design * fit.coef).array().exp();
  double pearson = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (y[i] - mu[i]) / mu[i];
    pearson += r * r;
  }
  const double dof = static_cast<double>(std::max<Eigen::Index>(n - d, 1));
  GammaGlmResult out;
  out.coef = fit.coef;
  out.dispersion = pearson / dof;
  out.report = fit.report;
  const double shape = 1.0 / out.dispersion;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ll += math::gamma_logpdf(y[i], {shape, mu[i] / shape});
  }
  out.report.log_likelihood = ll;
  out.report.coefficient_standard_errors = standard_errors(fit.information, out.dispersion);
  return out;
}

TweedieGlmResult fit_tweedie_glm(const Mat& design, const Vec& y, double power) {
  check_shapes(design, y);
  if (!(power > 1.0 && power < 2.0)) throw DomainError("Tweedie power must lie in (1, 2)");
  require_full_rank(design);
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  LogLinkResult fit = irls_log_link(design, y, power, "Tweedie GLM");
  const Vec mu = (design * fit.coef).array().exp();
  double pearson = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = y[i] - mu[i];
    pearson += r * r / std::pow(mu[i], power);
  }
  TweedieGlmResult out;
  out.coef = fit.coef;
  out.pearson_phi = pearson / static_cast<double>(std::max<Eigen::Index>(n - d, 1));
  out.report = fit.report;
  out.report.coefficient_standard_errors = standard_errors(fit.information, out.pearson_phi);
  return out;
}

}  // namespace semidiag::models
