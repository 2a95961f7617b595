#pragma once

// Seeded data generators and the replicated scenario runner.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semidiag/dataset.hpp"
#include "semidiag/models.hpp"
#include "semidiag/random.hpp"
#include "semidiag/residuals.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::sim {

/// Logistic zero part and log-link gamma positive part on X1 ~ N(0,1),
/// X2 ~ Bernoulli(0.4).
struct TwoPartGammaParams {
  double beta0_zero = -1.0;
  double beta1_zero = -2.0;
  double beta2_zero = -1.0;
  double beta0_pos = -1.0;
  double beta1_pos = -1.0;
  double beta2_pos = -2.0;
  double dispersion = 0.5;
  double x2_prob = 0.4;
};

/// Latent Y* = b0 + b1 X1 + b2 X2 + sd Z with X1, X2 ~ U(-h, h); Y = 0 when Y* < limit.
struct TobitParams {
  double beta0 = 2.0;
  double beta1 = 2.0;
  double beta2 = 2.0;
  double sd = 0.2;
  double halfwidth = 1.0;
  double limit = 0.0;
};

/// Tweedie data with mu = exp(intercept + slope X1), X1 ~ N(0,1).
struct TweedieGenParams {
  double intercept = 0.5;
  double slope = 1.0;
  double power = 1.5;
  double phi = 3.0;
};

Dataset gen_two_part_gamma(std::size_t n, const TwoPartGammaParams& params, std::uint64_t seed);
Dataset gen_two_part_gamma(std::size_t n, double beta0_zero, std::uint64_t seed);

struct TobitData {
  Dataset data;
  Eigen::VectorXd latent;
};

TobitData gen_tobit(std::size_t n, const TobitParams& params, std::uint64_t seed);
TobitData gen_tobit(std::size_t n, double sd, double covariate_halfwidth, std::uint64_t seed);

Dataset gen_tweedie(std::size_t n, const TweedieGenParams& params, std::uint64_t seed);

/// Positive responses from GB2(a, exp(x'beta), p, q) on design [1, X1], X1 ~ N(0,1),
/// drawn through gb2_quantile.
Dataset gen_gb2(std::size_t n, const Eigen::VectorXd& beta, double a, double p, double q,
                std::uint64_t seed);

/// One compound Poisson-gamma draw.
double draw_tweedie(Rng& rng, const math::TweedieParams& params);

// --- scenarios ------------------------------------------------------------------

enum class GeneratorKind { two_part_gamma, tobit, figure1 };
enum class Arm { twopart_gamma, twopart_gb2, tweedie, tobit, tobit_missing };

std::optional<GeneratorKind> parse_generator(const std::string& name);
std::string to_string(GeneratorKind kind);
std::optional<Arm> parse_arm(const std::string& name);
std::string to_string(Arm arm);

struct ScenarioConfig {
  GeneratorKind generator = GeneratorKind::two_part_gamma;
  std::size_t n = 500;
  std::uint64_t seed = 1;
  TwoPartGammaParams two_part;
  TobitParams tobit;
  TweedieGenParams tweedie;
  std::vector<Arm> arms{Arm::twopart_gamma, Arm::tweedie};
  std::size_t replications = 1;
  /// Worker threads; 0 means SEMIDIAG_THREADS or the hardware count.
  unsigned threads = 0;

  /// Throws DomainError when a field violates its constraint.
  void validate() const;
};

/// Applies one `key=value` setting. Throws DomainError on unknown keys or bad values.
void apply_setting(ScenarioConfig& config, const std::string& key, const std::string& value);

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
ScenarioConfig parse_scenario(std::istream& in, ScenarioConfig base = {});

struct ArmOutcome {
  Arm arm;
  bool converged = false;
  std::string error;
  double ks = 0.0;
  double ks_cox_snell = 0.0;
  double log_likelihood = 0.0;
};

struct ReplicationResult {
  std::size_t replication = 0;
  std::vector<ArmOutcome> arms;
};

struct ArmAggregate {
  Arm arm;
  std::size_t fitted = 0;
  std::size_t failures = 0;
  double mean_ks = 0.0;
  double sd_ks = 0.0;
  double median_ks = 0.0;
  double q05_ks = 0.0;
  double q95_ks = 0.0;
  double mean_ks_cox_snell = 0.0;
};

/// Residual vectors retained for replication 0, for figure emission.
struct ArmFigures {
  Arm arm;
  residuals::ResidualSet residuals;
  /// Deviance and Pearson residuals, present for the Tweedie arm.
  std::vector<double> deviance;
  std::vector<double> pearson;
};

struct ScenarioResult {
  std::vector<ReplicationResult> replications;
  std::vector<ArmAggregate> aggregate;
  std::vector<ArmFigures> figures;

  const ArmAggregate& aggregate_for(Arm arm) const;
};

/// The dataset replication r sees, generated with `seed` = config.seed + r.
Dataset generate(const ScenarioConfig& config, std::uint64_t seed);

ScenarioResult run_scenario(const ScenarioConfig& config);

/// Worker count from SEMIDIAG_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

/// `rep,arm,ks,converged` rows.
void write_replications_csv(std::ostream& out, const ScenarioResult& result);
/// One row per arm with KS summary statistics.
void write_aggregate_csv(std::ostream& out, const ScenarioResult& result);

}  // namespace semidiag::sim
