#include "semidiag/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semidiag::optimize {
namespace {

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::MatrixXd numeric_hessian(const Objective& objective, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd g_plus(n);
  Eigen::VectorXd g_minus(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-5 * std::max(1.0, std::fabs(x[j]));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[j] += h;
    xm[j] -= h;
    objective(xp, g_plus);
    objective(xm, g_minus);
    hess.col(j) = (g_plus - g_minus) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

Result minimize(const Objective& objective, Eigen::VectorXd x0, const Options& options) {
  const Eigen::Index n = x0.size();
  Result result;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd grad(n);
  double f = objective(x, grad);
  if (!std::isfinite(f)) {
    result.x = x;
    result.value = f;
    result.gradient_norm = std::numeric_limits<double>::infinity();
    return result;
  }
  Eigen::MatrixXd inv_hess = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd grad_new(n);
  int iter = 0;
  for (; iter < options.max_iterations && sup_norm(grad) >= options.gradient_tol; ++iter) {
    Eigen::VectorXd dir = -inv_hess * grad;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      inv_hess.setIdentity();
      dir = -grad;
      slope = grad.dot(dir);
    }
    double step = 1.0;
    // keep the first trial step moderate in parameter space
    const double dir_norm = sup_norm(dir);
    if (dir_norm > 5.0) step = 5.0 / dir_norm;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x + step * dir;
      f_new = objective(x_new, grad_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      inv_hess = (eye - rho * s * y.transpose()) * inv_hess * (eye - rho * y * s.transpose()) +
                 rho * s * s.transpose();
    }
    const bool stalled = std::fabs(f - f_new) <= 1e-15 * std::max(1.0, std::fabs(f));
    x = x_new;
    f = f_new;
    grad = grad_new;
    if (stalled) break;
  }

  // Newton polish: quadratic convergence near the optimum.
  for (int k = 0; k < options.newton_polish_steps && sup_norm(grad) >= options.gradient_tol;
       ++k, ++iter) {
    const Eigen::MatrixXd hess = numeric_hessian(objective, x);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd dir = -ldlt.solve(grad);
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      Eigen::VectorXd x_new = x + step * dir;
      const double f_new = objective(x_new, grad_new);
      if (std::isfinite(f_new) &&
          (f_new <= f + 1e-12 * std::max(1.0, std::fabs(f)) ||
           sup_norm(grad_new) < sup_norm(grad))) {
        x = x_new;
        f = f_new;
        grad = grad_new;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  result.x = x;
  result.value = f;
  result.gradient_norm = sup_norm(grad);
  result.iterations = iter;
  result.converged = result.gradient_norm < options.gradient_tol;
  if (result.converged) result.hessian = numeric_hessian(objective, x);
  return result;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace semidiag::optimize
