#pragma once

#include <Eigen/Dense>
#include <functional>

namespace semidiag::optimize {

/// Objective returning f(x) and writing the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct Options {
  double gradient_tol = 1e-6;  // sup-norm
  int max_iterations = 1000;
  int newton_polish_steps = 25;
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;  // sup-norm at x
  int iterations = 0;
  bool converged = false;
  /// Finite-difference Hessian at x, when the Newton polish computed one.
  Eigen::MatrixXd hessian;
};

/// BFGS with Armijo backtracking, then Newton steps on a finite-difference
/// Hessian of the analytic gradient until the sup-norm gradient test passes.
Result minimize(const Objective& objective, Eigen::VectorXd x0, const Options& options = {});

/// Central-difference Hessian of an analytic gradient, symmetrized.
Eigen::MatrixXd numeric_hessian(const Objective& objective, const Eigen::VectorXd& x);

/// Golden-section search for the maximum of a unimodal function on [lo, hi];
/// stops when the bracket is narrower than `tol`. Returns the argmax.
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol);

}  // namespace semidiag::optimize
