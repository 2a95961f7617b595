#include "semidiag/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "semidiag/error.hpp"
#include "semidiag/random.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::residuals {
namespace {

void check_probability(double v, std::size_t i, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << what << " at index " << i << " is " << v << ", outside [0, 1]";
    throw DomainError(os.str());
  }
}

}  // namespace

HEstimator::HEstimator(std::span<const double> p0_values)
    : sorted_p0_(p0_values.begin(), p0_values.end()) {
  if (sorted_p0_.empty()) throw DomainError("H estimator needs at least one p0 value");
  for (std::size_t i = 0; i < sorted_p0_.size(); ++i) check_probability(sorted_p0_[i], i, "p0");
  std::sort(sorted_p0_.begin(), sorted_p0_.end());
}

double HEstimator::operator()(double s) const {
  const auto count = std::upper_bound(sorted_p0_.begin(), sorted_p0_.end(), s) - sorted_p0_.begin();
  return s * (static_cast<double>(count) / static_cast<double>(sorted_p0_.size()));
}

HEstimator build_h(std::span<const double> p0_values) { return HEstimator(p0_values); }

ResidualSet proposed_residuals(std::span<const double> p0_values,
                               std::span<const double> cdf_values) {
  if (p0_values.size() != cdf_values.size()) {
    throw DataError("p0 has " + std::to_string(p0_values.size()) + " values but cdf has " +
                    std::to_string(cdf_values.size()));
  }
  for (std::size_t i = 0; i < cdf_values.size(); ++i) {
    check_probability(cdf_values[i], i, "cdf value");
    if (cdf_values[i] < p0_values[i]) {
      std::ostringstream os;
      os.precision(17);
      os << "cdf value " << cdf_values[i] << " is below p0 " << p0_values[i] << " at index " << i;
      throw DataError(os.str());
    }
  }
  const HEstimator h(p0_values);
  ResidualSet out;
  out.p0_hat.assign(p0_values.begin(), p0_values.end());
  out.cdf_value.assign(cdf_values.begin(), cdf_values.end());
  out.proposed.resize(cdf_values.size());
  for (std::size_t i = 0; i < cdf_values.size(); ++i) out.proposed[i] = h(cdf_values[i]);
  out.normal_scale = normal_transform(out.proposed);
  return out;
}

ResidualSet out_of_sample_errors(std::span<const double> p0_tilde,
                                 std::span<const double> cdf_tilde) {
  return proposed_residuals(p0_tilde, cdf_tilde);
}

std::vector<double> normal_transform(std::span<const double> residuals) {
  const double n = static_cast<double>(residuals.size());
  const double lo = 1.0 / (4.0 * n);
  const double hi = 1.0 - lo;
  std::vector<double> out(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    check_probability(residuals[i], i, "residual");
    out[i] = math::normal_quantile(std::clamp(residuals[i], lo, hi));
  }
  return out;
}

std::vector<double> cox_snell(std::span<const double> cdf_values) {
  return {cdf_values.begin(), cdf_values.end()};
}

std::vector<double> pearson_residuals(std::span<const double> y, std::span<const double> mean,
                                      std::span<const double> variance) {
  if (y.size() != mean.size() || y.size() != variance.size()) {
    throw DataError("pearson_residuals: length mismatch");
  }
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(variance[i] > 0.0)) {
      throw DomainError("non-positive variance at index " + std::to_string(i));
    }
    out[i] = (y[i] - mean[i]) / std::sqrt(variance[i]);
  }
  return out;
}

std::vector<double> tweedie_deviance_residuals(std::span<const double> y,
                                               std::span<const double> mu, double phi,
                                               double power) {
  if (y.size() != mu.size()) throw DataError("tweedie_deviance_residuals: length mismatch");
  if (!(phi > 0.0)) throw DomainError("dispersion must be positive");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dev = math::tweedie_unit_deviance(y[i], mu[i], power);
    const double sign = y[i] > mu[i] ? 1.0 : (y[i] < mu[i] ? -1.0 : 0.0);
    out[i] = sign * std::sqrt(dev / phi);
  }
  return out;
}

std::vector<double> randomized_quantile_residuals(std::span<const double> p0,
                                                  std::span<const double> cdf,
                                                  const std::vector<bool>& is_zero,
                                                  std::uint64_t seed) {
  if (p0.size() != cdf.size() || p0.size() != is_zero.size()) {
    throw DataError("randomized_quantile_residuals: length mismatch");
  }
  Rng rng(seed);
  std::vector<double> out(p0.size());
  for (std::size_t i = 0; i < p0.size(); ++i) {
    // clamp keeps Phi^{-1} finite when the fitted CDF reaches 1 in floating point
    const double u = is_zero[i] ? rng.uniform() * p0[i] : cdf[i];
    out[i] = math::normal_quantile(std::clamp(u, 1e-16, 1.0 - 1e-16));
  }
  return out;
}

}  // namespace semidiag::residuals
