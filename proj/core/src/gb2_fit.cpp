#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "semidiag/error.hpp"
#include "semidiag/models.hpp"
#include "semidiag/optimize.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::models {
namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double inv_logit(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace

GB2Result fit_gb2(const Mat& design, const Vec& y) {
  if (design.rows() != y.size()) throw DataError("design rows differ from response length");
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  if (n < d + 3) throw DataError("GB2 fit needs at least d + 3 positive observations");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(y[i] > 0.0)) throw DataError("GB2 requires positive responses (index " +
                                       std::to_string(i) + ")");
  }
  require_full_rank(design);
  const Vec log_y = y.array().log();

  // theta = (beta, log a, log p, log q); log-density per observation is
  // log a - log y + p t - log B(p, q) - (p + q) softplus(t), t = a (log y - x'beta).
  const auto objective = [&](const Vec& theta, Vec& grad) {
    const double a = std::exp(theta[d]);
    const double p = std::exp(theta[d + 1]);
    const double q = std::exp(theta[d + 2]);
    grad.setZero(d + 3);
    if (!std::isfinite(a) || !std::isfinite(p) || !std::isfinite(q) || a <= 0 || p <= 0 ||
        q <= 0) {
      return std::numeric_limits<double>::infinity();
    }
    const Vec eta = design * theta.head(d);
    const double log_b = math::log_beta(p, q);
    const double psi_pq = math::digamma(p + q);
    const double dp_const = -math::digamma(p) + psi_pq;
    const double dq_const = -math::digamma(q) + psi_pq;
    double ll = 0.0;
    Vec d_eta(n);
    double g_log_a = 0.0;
    double g_p = 0.0;
    double g_q = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = a * (log_y[i] - eta[i]);
      const double sp = softplus(t);
      ll += theta[d] - log_y[i] + p * t - log_b - (p + q) * sp;
      const double dl_dt = p - (p + q) * inv_logit(t);
      d_eta[i] = -a * dl_dt;
      g_log_a += 1.0 + t * dl_dt;
      g_p += t - sp + dp_const;
      g_q += -sp + dq_const;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    grad.head(d) = -inv_n * (design.transpose() * d_eta);
    grad[d] = -inv_n * g_log_a;
    grad[d + 1] = -inv_n * g_p * p;
    grad[d + 2] = -inv_n * g_q * q;
    return -inv_n * ll;
  };

  // warm start from the gamma GLM: with a = 1, p = 1, q = 2 the GB2 mean equals b
  const GammaGlmResult gamma = fit_gamma_glm(design, y);
  Vec start(d + 3);
  start.head(d) = gamma.coef;
  start[d] = 0.0;
  start[d + 1] = 0.0;
  start[d + 2] = std::log(2.0);

  optimize::Options options;
  options.gradient_tol = kGradientTol;
  optimize::Result best = optimize::minimize(objective, start, options);
  int attempts = 1;
  if (!best.converged) {
    static constexpr std::array<std::array<double, 3>, 5> kJitter = {{
        {0.5, 0.5, 0.5},
        {-0.5, -0.5, -0.5},
        {0.5, -0.5, 0.5},
        {-0.5, 0.5, -0.5},
        {0.5, 0.5, -0.5},
    }};
    for (const auto& jitter : kJitter) {
      Vec trial = start;
      for (int k = 0; k < 3; ++k) trial[d + k] += jitter[static_cast<std::size_t>(k)];
      optimize::Result r = optimize::minimize(objective, trial, options);
      ++attempts;
      if (r.converged && (!best.converged || r.value < best.value)) best = std::move(r);
    }
  }
  if (!best.converged) {
    throw FitError("GB2 likelihood maximization failed after " + std::to_string(attempts) +
                   " starts (gradient norm " + std::to_string(best.gradient_norm) + ")");
  }

  GB2Result out;
  out.part.coef = best.x.head(d);
  out.part.a = std::exp(best.x[d]);
  out.part.p = std::exp(best.x[d + 1]);
  out.part.q = std::exp(best.x[d + 2]);
  out.report.log_likelihood = -best.value * static_cast<double>(n);
  out.report.iterations = best.iterations;
  out.report.converged = true;
  if (attempts > 1) {
    out.report.warnings.push_back("GB2 used " + std::to_string(attempts) + " starting points");
  }
  if (best.hessian.size() > 0) {
    Eigen::LDLT<Mat> ldlt(best.hessian);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Mat cov = ldlt.solve(Mat::Identity(d + 3, d + 3)) / static_cast<double>(n);
      out.report.coefficient_standard_errors = cov.diagonal().head(d).cwiseSqrt();
    }
  }
  return out;
}

}  // namespace semidiag::models
