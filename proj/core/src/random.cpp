#include "semidiag/random.hpp"

#include <cmath>

#include "semidiag/error.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      const double m = std::sqrt(-2.0 * std::log(s) / s);
      spare_ = v * m;
      has_spare_ = true;
      return u * m;
    }
  }
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma variate requires shape > 0");
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^{1/a}
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

long Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  const double u = uniform();
  auto k = static_cast<long>(std::floor(mean));
  const double pmf_mode =
      std::exp(k * std::log(mean) - mean - math::log_gamma(static_cast<double>(k) + 1.0));
  // P(N <= k) = Q(k + 1, mean)
  double cdf = math::gamma_q(static_cast<double>(k) + 1.0, mean);
  double pmf = pmf_mode;
  if (u <= cdf) {
    // walk down while the previous cumulative level still covers u
    while (k > 0 && u <= cdf - pmf) {
      cdf -= pmf;
      pmf *= static_cast<double>(k) / mean;
      --k;
    }
    return k;
  }
  while (u > cdf) {
    ++k;
    pmf *= mean / static_cast<double>(k);
    cdf += pmf;
    if (pmf == 0.0 && cdf < u) break;
  }
  return k;
}

}  // namespace semidiag
