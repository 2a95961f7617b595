#include "semidiag/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "semidiag/diagnostics.hpp"
#include "semidiag/error.hpp"

namespace semidiag::sim {
namespace {

double inv_logit(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw DomainError("setting " + key + ": '" + value + "' is not a number");
  }
  return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw DomainError("setting " + key + ": '" + value + "' is not a nonnegative integer");
  }
  return out;
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) return std::nan("");
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

models::ModelFamily family_of(Arm arm) {
  switch (arm) {
    case Arm::twopart_gamma: return models::ModelFamily::twopart_gamma;
    case Arm::twopart_gb2: return models::ModelFamily::twopart_gb2;
    case Arm::tweedie: return models::ModelFamily::tweedie;
    case Arm::tobit:
    case Arm::tobit_missing: return models::ModelFamily::tobit;
  }
  return models::ModelFamily::tweedie;
}

struct RepOutput {
  ReplicationResult result;
  std::vector<ArmFigures> figures;
};

RepOutput run_replication(const ScenarioConfig& config, std::size_t rep) {
  RepOutput out;
  out.result.replication = rep;
  const Dataset data = generate(config, config.seed + rep);
  for (Arm arm : config.arms) {
    ArmOutcome outcome;
    outcome.arm = arm;
    try {
      const Dataset used = arm == Arm::tobit_missing ? data.drop_column("x2") : data;
      const double limit =
          (arm == Arm::tobit || arm == Arm::tobit_missing) ? config.tobit.limit : 0.0;
      const models::FitOutcome fit = models::fit_model(family_of(arm), used, limit);
      const Eigen::VectorXd p0 = models::p0_values(fit.model, used.design);
      const Eigen::VectorXd cdf = models::cdf_values(fit.model, used.response, used.design);
      residuals::ResidualSet rs = residuals::proposed_residuals(
          std::span<const double>(p0.data(), static_cast<std::size_t>(p0.size())),
          std::span<const double>(cdf.data(), static_cast<std::size_t>(cdf.size())));
      outcome.ks = diagnostics::ks_uniform(rs.proposed).ks_statistic;
      outcome.ks_cox_snell = diagnostics::ks_uniform(rs.cdf_value).ks_statistic;
      outcome.log_likelihood = fit.report.log_likelihood;
      outcome.converged = fit.report.converged;
      if (rep == 0) {
        ArmFigures fig;
        fig.arm = arm;
        fig.residuals = std::move(rs);
        if (const auto* tw = std::get_if<models::TweedieFit>(&fit.model)) {
          const std::size_t n = static_cast<std::size_t>(used.rows());
          std::vector<double> y(n), mu(n), var(n);
          for (std::size_t i = 0; i < n; ++i) {
            const auto m = models::moments(fit.model, used.design.row(static_cast<Eigen::Index>(i)).transpose());
            y[i] = used.response[static_cast<Eigen::Index>(i)];
            mu[i] = m->mean;
            var[i] = m->variance;
          }
          fig.deviance = residuals::tweedie_deviance_residuals(y, mu, tw->phi, tw->power);
          fig.pearson = residuals::pearson_residuals(y, mu, var);
        }
        out.figures.push_back(std::move(fig));
      }
    } catch (const std::exception& e) {
      outcome.converged = false;
      outcome.error = e.what();
    }
    out.result.arms.push_back(std::move(outcome));
  }
  return out;
}

}  // namespace

Dataset generate(const ScenarioConfig& config, std::uint64_t seed) {
  switch (config.generator) {
    case GeneratorKind::two_part_gamma: return gen_two_part_gamma(config.n, config.two_part, seed);
    case GeneratorKind::tobit: return gen_tobit(config.n, config.tobit, seed).data;
    case GeneratorKind::figure1: return gen_tweedie(config.n, config.tweedie, seed);
  }
  throw DomainError("unknown generator");
}

Dataset gen_two_part_gamma(std::size_t n, const TwoPartGammaParams& params, std::uint64_t seed) {
  if (!(params.dispersion > 0.0)) throw DomainError("dispersion must be positive");
  Rng rng(seed);
  Dataset data;
  data.column_names = {kInterceptName, "x1", "x2"};
  data.design.resize(static_cast<Eigen::Index>(n), 3);
  data.response.resize(static_cast<Eigen::Index>(n));
  const double shape = 1.0 / params.dispersion;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double x1 = rng.normal();
    const double x2 = rng.bernoulli(params.x2_prob) ? 1.0 : 0.0;
    data.design.row(i) << 1.0, x1, x2;
    const double p0 =
        inv_logit(params.beta0_zero + params.beta1_zero * x1 + params.beta2_zero * x2);
    if (rng.bernoulli(p0)) {
      data.response[i] = 0.0;
    } else {
      const double mean = std::exp(params.beta0_pos + params.beta1_pos * x1 + params.beta2_pos * x2);
      data.response[i] = rng.gamma(shape) * mean / shape;
    }
  }
  return data;
}

Dataset gen_two_part_gamma(std::size_t n, double beta0_zero, std::uint64_t seed) {
  TwoPartGammaParams params;
  params.beta0_zero = beta0_zero;
  return gen_two_part_gamma(n, params, seed);
}

TobitData gen_tobit(std::size_t n, const TobitParams& params, std::uint64_t seed) {
  if (!(params.sd > 0.0)) throw DomainError("Tobit sd must be positive");
  if (!(params.halfwidth > 0.0)) throw DomainError("covariate halfwidth must be positive");
  Rng rng(seed);
  TobitData out;
  Dataset& data = out.data;
  data.column_names = {kInterceptName, "x1", "x2"};
  data.design.resize(static_cast<Eigen::Index>(n), 3);
  data.response.resize(static_cast<Eigen::Index>(n));
  out.latent.resize(static_cast<Eigen::Index>(n));
  const double h = params.halfwidth;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double x1 = -h + 2.0 * h * rng.uniform();
    const double x2 = -h + 2.0 * h * rng.uniform();
    data.design.row(i) << 1.0, x1, x2;
    const double latent =
        params.beta0 + params.beta1 * x1 + params.beta2 * x2 + params.sd * rng.normal();
    out.latent[i] = latent;
    data.response[i] = latent < params.limit ? 0.0 : latent;
  }
  return out;
}

TobitData gen_tobit(std::size_t n, double sd, double covariate_halfwidth, std::uint64_t seed) {
  TobitParams params;
  params.sd = sd;
  params.halfwidth = covariate_halfwidth;
  return gen_tobit(n, params, seed);
}

double draw_tweedie(Rng& rng, const math::TweedieParams& params) {
  const math::CpgDerived cpg = math::to_compound_poisson(params);
  const long count = rng.poisson(cpg.lambda);
  if (count == 0) return 0.0;
  // a sum of `count` iid Gamma(alpha, theta) jumps is Gamma(count * alpha, theta)
  return rng.gamma(static_cast<double>(count) * cpg.jump_shape) * cpg.jump_scale;
}

Dataset gen_tweedie(std::size_t n, const TweedieGenParams& params, std::uint64_t seed) {
  math::validate(math::TweedieParams{1.0, params.phi, params.power});
  Rng rng(seed);
  Dataset data;
  data.column_names = {kInterceptName, "x1"};
  data.design.resize(static_cast<Eigen::Index>(n), 2);
  data.response.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double x1 = rng.normal();
    data.design.row(i) << 1.0, x1;
    const double mu = std::exp(params.intercept + params.slope * x1);
    data.response[i] = draw_tweedie(rng, {mu, params.phi, params.power});
  }
  return data;
}

Dataset gen_gb2(std::size_t n, const Eigen::VectorXd& beta, double a, double p, double q,
                std::uint64_t seed) {
  if (beta.size() != 2) throw DomainError("gen_gb2 expects (intercept, slope)");
  Rng rng(seed);
  Dataset data;
  data.column_names = {kInterceptName, "x1"};
  data.design.resize(static_cast<Eigen::Index>(n), 2);
  data.response.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double x1 = rng.normal();
    data.design.row(i) << 1.0, x1;
    const double b = std::exp(beta[0] + beta[1] * x1);
    data.response[i] = math::gb2_quantile(rng.uniform(), {a, b, p, q});
  }
  return data;
}

std::optional<GeneratorKind> parse_generator(const std::string& name) {
  if (name == "two-part-gamma") return GeneratorKind::two_part_gamma;
  if (name == "tobit") return GeneratorKind::tobit;
  if (name == "figure1") return GeneratorKind::figure1;
  return std::nullopt;
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::two_part_gamma: return "two-part-gamma";
    case GeneratorKind::tobit: return "tobit";
    case GeneratorKind::figure1: return "figure1";
  }
  return "unknown";
}

std::optional<Arm> parse_arm(const std::string& name) {
  if (name == "twopart-gamma") return Arm::twopart_gamma;
  if (name == "twopart-gb2") return Arm::twopart_gb2;
  if (name == "tweedie") return Arm::tweedie;
  if (name == "tobit") return Arm::tobit;
  if (name == "tobit-missing") return Arm::tobit_missing;
  return std::nullopt;
}

std::string to_string(Arm arm) {
  switch (arm) {
    case Arm::twopart_gamma: return "twopart-gamma";
    case Arm::twopart_gb2: return "twopart-gb2";
    case Arm::tweedie: return "tweedie";
    case Arm::tobit: return "tobit";
    case Arm::tobit_missing: return "tobit-missing";
  }
  return "unknown";
}

void ScenarioConfig::validate() const {
  if (n < 10) throw DomainError("scenario n must be at least 10");
  if (replications < 1) throw DomainError("scenario needs at least one replication");
  if (arms.empty()) throw DomainError("scenario needs at least one arm");
  if (!(two_part.dispersion > 0.0)) throw DomainError("dispersion must be positive");
  if (!(two_part.x2_prob > 0.0 && two_part.x2_prob < 1.0)) {
    throw DomainError("x2 probability must lie in (0, 1)");
  }
  if (!(tobit.sd > 0.0)) throw DomainError("Tobit sd must be positive");
  if (!(tobit.halfwidth > 0.0)) throw DomainError("covariate halfwidth must be positive");
  if (!(tobit.limit >= 0.0)) throw DomainError("Tobit limit must be nonnegative");
  math::validate(math::TweedieParams{1.0, tweedie.phi, tweedie.power});
  if (generator == GeneratorKind::figure1 &&
      std::find(arms.begin(), arms.end(), Arm::tobit_missing) != arms.end()) {
    throw DomainError("the tobit-missing arm needs a generator with an x2 column");
  }
}

void apply_setting(ScenarioConfig& config, const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);
  if (key == "generator") {
    const auto g = parse_generator(value);
    if (!g) throw DomainError("unknown generator '" + value + "'");
    config.generator = *g;
  } else if (key == "n") {
    config.n = parse_unsigned(key, value);
  } else if (key == "seed") {
    config.seed = parse_unsigned(key, value);
  } else if (key == "reps" || key == "replications") {
    config.replications = parse_unsigned(key, value);
  } else if (key == "threads") {
    config.threads = static_cast<unsigned>(parse_unsigned(key, value));
  } else if (key == "arms") {
    config.arms.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto arm = parse_arm(trim(item));
      if (!arm) throw DomainError("unknown arm '" + trim(item) + "'");
      config.arms.push_back(*arm);
    }
  } else if (key == "beta0_zero") {
    config.two_part.beta0_zero = parse_double(key, value);
  } else if (key == "dispersion") {
    config.two_part.dispersion = parse_double(key, value);
  } else if (key == "sd") {
    config.tobit.sd = parse_double(key, value);
  } else if (key == "halfwidth") {
    config.tobit.halfwidth = parse_double(key, value);
  } else if (key == "limit") {
    config.tobit.limit = parse_double(key, value);
  } else if (key == "tw_power") {
    config.tweedie.power = parse_double(key, value);
  } else if (key == "tw_phi") {
    config.tweedie.phi = parse_double(key, value);
  } else if (key == "tw_intercept") {
    config.tweedie.intercept = parse_double(key, value);
  } else if (key == "tw_slope") {
    config.tweedie.slope = parse_double(key, value);
  } else {
    throw DomainError("unknown scenario setting '" + raw_key + "'");
  }
}

ScenarioConfig parse_scenario(std::istream& in, ScenarioConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DomainError("scenario line " + std::to_string(lineno) + " is not key=value");
    }
    apply_setting(base, t.substr(0, eq), t.substr(eq + 1));
  }
  return base;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("SEMIDIAG_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  const std::size_t reps = config.replications;
  std::vector<RepOutput> outputs(reps);
  const unsigned threads = static_cast<unsigned>(
      std::min<std::size_t>(reps, config.threads > 0 ? config.threads : default_thread_count()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) outputs[r] = run_replication(config, r);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ScenarioResult result;
  for (auto& out : outputs) {
    result.replications.push_back(std::move(out.result));
    for (auto& fig : out.figures) result.figures.push_back(std::move(fig));
  }
  for (std::size_t a = 0; a < config.arms.size(); ++a) {
    ArmAggregate agg;
    agg.arm = config.arms[a];
    std::vector<double> ks;
    double cs_sum = 0.0;
    for (const auto& rep : result.replications) {
      const ArmOutcome& o = rep.arms[a];
      if (o.error.empty()) {
        ks.push_back(o.ks);
        cs_sum += o.ks_cox_snell;
      } else {
        ++agg.failures;
      }
    }
    agg.fitted = ks.size();
    if (!ks.empty()) {
      double sum = 0.0;
      for (double k : ks) sum += k;
      agg.mean_ks = sum / static_cast<double>(ks.size());
      double ss = 0.0;
      for (double k : ks) ss += (k - agg.mean_ks) * (k - agg.mean_ks);
      agg.sd_ks = ks.size() > 1 ? std::sqrt(ss / static_cast<double>(ks.size() - 1)) : 0.0;
      agg.mean_ks_cox_snell = cs_sum / static_cast<double>(ks.size());
      std::sort(ks.begin(), ks.end());
      agg.median_ks = quantile_sorted(ks, 0.5);
      agg.q05_ks = quantile_sorted(ks, 0.05);
      agg.q95_ks = quantile_sorted(ks, 0.95);
    }
    result.aggregate.push_back(agg);
  }
  return result;
}

const ArmAggregate& ScenarioResult::aggregate_for(Arm arm) const {
  for (const auto& a : aggregate) {
    if (a.arm == arm) return a;
  }
  throw DomainError("scenario has no arm " + to_string(arm));
}

void write_replications_csv(std::ostream& out, const ScenarioResult& result) {
  out << "rep,arm,ks,converged\n";
  for (const auto& rep : result.replications) {
    for (const auto& arm : rep.arms) {
      out << rep.replication << ',' << to_string(arm.arm) << ','
          << (arm.error.empty() ? fmt_full(arm.ks) : std::string("nan")) << ','
          << (arm.converged ? "true" : "false") << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const ScenarioResult& result) {
  out << "arm,fitted,failures,mean_ks,sd_ks,median_ks,q05_ks,q95_ks,mean_ks_cox_snell\n";
  for (const auto& a : result.aggregate) {
    out << to_string(a.arm) << ',' << a.fitted << ',' << a.failures << ',' << fmt_full(a.mean_ks)
        << ',' << fmt_full(a.sd_ks) << ',' << fmt_full(a.median_ks) << ',' << fmt_full(a.q05_ks)
        << ',' << fmt_full(a.q95_ks) << ',' << fmt_full(a.mean_ks_cox_snell) << '\n';
  }
}

}  // namespace semidiag::sim
