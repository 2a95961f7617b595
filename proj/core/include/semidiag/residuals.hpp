#pragma once

// Uniformity-based residuals for semicontinuous regression.
//
// With p0(x) = P(Y = 0 | x) and F(y | x) the fitted conditional CDF, the
// probability integral transform F(Y | X) is not uniform because of the mass
// at zero; its CDF is H(s) = s * P(p0(X) <= s). Composing with the empirical
// H-hat restores uniformity:
//
//   r_i = H-hat(F(Y_i | X_i)),  H-hat(s) = (s / n) * #{ j : p0(X_j) <= s }.

#include <cstdint>
#include <span>
#include <vector>

namespace semidiag::residuals {

/// Empirical H built from a pool of fitted zero probabilities.
class HEstimator {
 public:
  /// Throws DomainError on an empty pool or values outside [0, 1].
  explicit HEstimator(std::span<const double> p0_values);

  /// s * (count of pool values <= s) / n, inclusive comparison.
  double operator()(double s) const;

  std::size_t size() const { return sorted_p0_.size(); }
  const std::vector<double>& sorted_pool() const { return sorted_p0_; }

 private:
  std::vector<double> sorted_p0_;
};

HEstimator build_h(std::span<const double> p0_values);

struct ResidualSet {
  std::vector<double> p0_hat;
  std::vector<double> cdf_value;
  std::vector<double> proposed;
  std::vector<double> normal_scale;

  std::size_t size() const { return proposed.size(); }
};

/// r_i = H-hat(F_i) with H-hat built from the same sample's p0 values.
/// Throws DataError naming the index on length mismatch or F_i < p0_i.
ResidualSet proposed_residuals(std::span<const double> p0_values,
                               std::span<const double> cdf_values);

/// Held-out errors: the pool and the CDF values both come from the held-out
/// covariates under the in-sample fit. Same algorithm as proposed_residuals.
ResidualSet out_of_sample_errors(std::span<const double> p0_tilde,
                                 std::span<const double> cdf_tilde);

/// Phi^{-1}(clamp(r, 1/(4n), 1 - 1/(4n))) with n = residuals.size().
std::vector<double> normal_transform(std::span<const double> residuals);

/// Cox-Snell residuals are the fitted CDF values themselves.
std::vector<double> cox_snell(std::span<const double> cdf_values);

/// (y - mean) / sqrt(variance). Throws DomainError on non-positive variance.
std::vector<double> pearson_residuals(std::span<const double> y, std::span<const double> mean,
                                      std::span<const double> variance);

/// sign(y - mu) * sqrt(d(y, mu) / phi) with the Tweedie unit deviance.
std::vector<double> tweedie_deviance_residuals(std::span<const double> y,
                                               std::span<const double> mu, double phi,
                                               double power);

/// Jittered residuals: u ~ U(0, p0_i) for zero outcomes, u = F_i otherwise,
/// returned on the normal scale. Reproducible for a fixed seed.
std::vector<double> randomized_quantile_residuals(std::span<const double> p0,
                                                  std::span<const double> cdf,
                                                  const std::vector<bool>& is_zero,
                                                  std::uint64_t seed);

}  // namespace semidiag::residuals
