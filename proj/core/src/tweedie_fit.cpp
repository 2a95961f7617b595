#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "semidiag/error.hpp"
#include "semidiag/models.hpp"
#include "semidiag/optimize.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::models {

double tweedie_log_likelihood(const Mat& design, const Vec& y, const Vec& coef, double phi,
                              double power) {
  const Vec eta = design * coef;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const math::TweedieParams params{std::exp(eta[i]), phi, power};
    if (y[i] == 0.0) {
      ll -= math::to_compound_poisson(params).lambda;
    } else {
      ll += math::tweedie_logpdf(y[i], params);
    }
  }
  return ll;
}

TweedieResult fit_tweedie(const Mat& design, const Vec& y, const TweedieOptions& options) {
  if (design.rows() != y.size()) throw DataError("design rows differ from response length");
  bool any_zero = false;
  bool any_positive = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) throw DataError("negative response at index " + std::to_string(i));
    any_zero = any_zero || y[i] == 0.0;
    any_positive = any_positive || y[i] > 0.0;
  }
  if (!any_zero || !any_positive) {
    throw DataError("Tweedie fit requires both zero and positive responses");
  }
  require_full_rank(design);

  TweedieResult out;
  // every power evaluated, keyed by power, so refinement can reuse grid points
  std::map<double, ProfilePoint> evaluated;
  const auto profile_at = [&](double power) -> double {
    if (auto it = evaluated.find(power); it != evaluated.end()) return it->second.log_likelihood;
    try {
      const TweedieGlmResult glm = fit_tweedie_glm(design, y, power);
      const double ll = tweedie_log_likelihood(design, y, glm.coef, glm.pearson_phi, power);
      evaluated[power] = ProfilePoint{power, glm.pearson_phi, ll};
      return ll;
    } catch (const FitError& e) {
      out.report.warnings.push_back("power " + std::to_string(power) + " dropped: " + e.what());
    } catch (const EvaluationError& e) {
      out.report.warnings.push_back("power " + std::to_string(power) + " dropped: " + e.what());
    }
    return -std::numeric_limits<double>::infinity();
  };

  const int steps =
      static_cast<int>(std::llround((options.grid_hi - options.grid_lo) / options.grid_step));
  std::vector<double> grid;
  for (int k = 0; k <= steps; ++k) grid.push_back(options.grid_lo + k * options.grid_step);

  std::size_t best = grid.size();
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double ll = profile_at(grid[k]);
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }
  if (best == grid.size()) {
    throw FitError("Tweedie fit failed at every power on the profile grid");
  }

  double power = grid[best];
  if (options.refine_tol > 0.0 && grid.size() > 1) {
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double refined = optimize::golden_section_max(profile_at, lo, hi, options.refine_tol);
    if (profile_at(refined) > best_ll) power = refined;
  }

  const TweedieGlmResult glm = fit_tweedie_glm(design, y, power);
  double phi = glm.pearson_phi;
  if (options.refine_phi) {
    const auto ll_of_log_phi = [&](double log_phi) {
      try {
        return tweedie_log_likelihood(design, y, glm.coef, std::exp(log_phi), power);
      } catch (const EvaluationError&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
    double centre = std::log(phi);
    for (int widen = 0; widen < 4; ++widen) {
      const double lo = centre - 1.0;
      const double hi = centre + 1.0;
      const double arg = optimize::golden_section_max(ll_of_log_phi, lo, hi, 1e-6);
      centre = arg;
      if (arg - lo > 1e-3 && hi - arg > 1e-3) break;
    }
    if (ll_of_log_phi(centre) >= ll_of_log_phi(std::log(phi))) phi = std::exp(centre);
  }

  out.fit.coef = glm.coef;
  out.fit.phi = phi;
  out.fit.power = power;
  out.report.log_likelihood = tweedie_log_likelihood(design, y, glm.coef, phi, power);
  out.report.iterations = glm.report.iterations;
  out.report.converged = glm.report.converged;
  if (glm.report.coefficient_standard_errors) {
    out.report.coefficient_standard_errors =
        *glm.report.coefficient_standard_errors * std::sqrt(phi / glm.pearson_phi);
  }
  for (const auto& [p, point] : evaluated) out.profile.push_back(point);
  return out;
}

}  // namespace semidiag::models
