#include <cmath>
#include <string>

#include "semidiag/error.hpp"
#include "semidiag/models.hpp"
#include "semidiag/optimize.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::models {

TobitResult fit_tobit(const Mat& design, const Vec& y, double limit) {
  if (design.rows() != y.size()) throw DataError("design rows differ from response length");
  if (!(limit >= 0.0) || !std::isfinite(limit)) {
    throw DomainError("Tobit limit must be finite and nonnegative");
  }
  require_full_rank(design);
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  Eigen::Index censored = 0;
  for (Eigen::Index i = 0; i < n; ++i) censored += y[i] <= limit ? 1 : 0;
  if (censored == 0) throw DataError("Tobit fit requires at least one censored observation");
  if (censored == n) throw DataError("Tobit fit requires at least one uncensored observation");

  // parameters: (beta, log sigma); objective is the mean negative log-likelihood
  const auto objective = [&](const Vec& theta, Vec& grad) {
    const Vec beta = theta.head(d);
    const double log_sigma = theta[d];
    const double sigma = std::exp(log_sigma);
    const Vec eta = design * beta;
    double ll = 0.0;
    Vec d_eta(n);
    double d_log_sigma = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y[i] <= limit) {
        const double c = (limit - eta[i]) / sigma;
        const double log_cdf = math::normal_logcdf(c);
        const double mills = std::exp(math::normal_logpdf(c) - log_cdf);
        ll += log_cdf;
        d_eta[i] = -mills / sigma;
        d_log_sigma += -mills * c;
      } else {
        const double r = (y[i] - eta[i]) / sigma;
        ll += math::normal_logpdf(r) - log_sigma;
        d_eta[i] = r / sigma;
        d_log_sigma += r * r - 1.0;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    grad.resize(d + 1);
    grad.head(d) = -inv_n * (design.transpose() * d_eta);
    grad[d] = -inv_n * d_log_sigma;
    return -inv_n * ll;
  };

  // start from least squares on all observations
  Vec theta(d + 1);
  theta.head(d) = design.colPivHouseholderQr().solve(y);
  const double rms = std::sqrt((y - design * theta.head(d)).squaredNorm() / static_cast<double>(n));
  theta[d] = std::log(std::max(rms, 1e-8));

  optimize::Options options;
  options.gradient_tol = kGradientTol;
  const optimize::Result opt = optimize::minimize(objective, theta, options);
  if (!opt.converged) {
    throw FitError("Tobit likelihood maximization did not converge (gradient norm " +
                   std::to_string(opt.gradient_norm) + ")");
  }
  TobitResult out;
  out.fit.coef = opt.x.head(d);
  out.fit.sigma = std::exp(opt.x[d]);
  out.fit.limit = limit;
  out.report.log_likelihood = -opt.value * static_cast<double>(n);
  out.report.iterations = opt.iterations;
  out.report.converged = true;
  if (opt.hessian.size() > 0) {
    Eigen::LDLT<Mat> ldlt(opt.hessian);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Mat cov = ldlt.solve(Mat::Identity(d + 1, d + 1)) / static_cast<double>(n);
      out.report.coefficient_standard_errors = cov.diagonal().head(d).cwiseSqrt();
    }
  }
  return out;
}

}  // namespace semidiag::models
