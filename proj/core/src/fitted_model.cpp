#include <algorithm>
#include <cmath>
#include <string>

#include "semidiag/error.hpp"
#include "semidiag/models.hpp"
#include "semidiag/special_math.hpp"

namespace semidiag::models {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kEtaCap = 700.0;

double linear(const Vec& coef, const VecRef& x) {
  if (coef.size() != x.size()) {
    throw DataError("covariate vector has length " + std::to_string(x.size()) +
                    " but the model expects " + std::to_string(coef.size()));
  }
  return coef.dot(x);
}

double exp_capped(double eta) { return std::exp(std::clamp(eta, -kEtaCap, kEtaCap)); }

double inv_logit(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

math::TweedieParams tweedie_params(const TweedieFit& fit, const VecRef& x) {
  return {exp_capped(linear(fit.coef, x)), fit.phi, fit.power};
}

double positive_cdf(const GammaPart& part, double y, const VecRef& x) {
  const double mean = exp_capped(linear(part.coef, x));
  const double shape = 1.0 / part.dispersion;
  return math::gamma_cdf(y, {shape, mean / shape});
}

double positive_cdf(const GB2Part& part, double y, const VecRef& x) {
  return math::gb2_cdf(y, {part.a, exp_capped(linear(part.coef, x)), part.p, part.q});
}

}  // namespace

std::string family_name(const FittedModel& model) {
  return std::visit(
      overloaded{
          [](const TwoPartFit& m) -> std::string {
            return std::holds_alternative<GammaPart>(m.positive) ? "twopart-gamma"
                                                                 : "twopart-gb2";
          },
          [](const TweedieFit&) -> std::string { return "tweedie"; },
          [](const TobitFit&) -> std::string { return "tobit"; },
      },
      model);
}

Eigen::Index dimension(const FittedModel& model) {
  return std::visit(overloaded{
                        [](const TwoPartFit& m) { return m.zero_coef.size(); },
                        [](const TweedieFit& m) { return m.coef.size(); },
                        [](const TobitFit& m) { return m.coef.size(); },
                    },
                    model);
}

double predict_p0(const FittedModel& model, const VecRef& x) {
  return std::visit(
      overloaded{
          [&](const TwoPartFit& m) { return inv_logit(linear(m.zero_coef, x)); },
          [&](const TweedieFit& m) { return math::tweedie_p0(tweedie_params(m, x)); },
          [&](const TobitFit& m) {
            return math::normal_cdf((m.limit - linear(m.coef, x)) / m.sigma);
          },
      },
      model);
}

double conditional_cdf(const FittedModel& model, double y, const VecRef& x) {
  if (!(y >= 0.0)) throw DomainError("conditional_cdf requires y >= 0");
  return std::visit(
      overloaded{
          [&](const TwoPartFit& m) {
            const double p0 = inv_logit(linear(m.zero_coef, x));
            if (y == 0.0) return p0;
            const double g =
                std::visit([&](const auto& part) { return positive_cdf(part, y, x); }, m.positive);
            return p0 + (1.0 - p0) * g;
          },
          [&](const TweedieFit& m) { return math::tweedie_cdf(y, tweedie_params(m, x)); },
          [&](const TobitFit& m) {
            const double eta = linear(m.coef, x);
            // mass below the limit is all placed at zero
            const double at = y < m.limit ? m.limit : y;
            return math::normal_cdf((at - eta) / m.sigma);
          },
      },
      model);
}

Vec p0_values(const FittedModel& model, const Mat& design) {
  Vec out(design.rows());
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    out[i] = predict_p0(model, design.row(i).transpose());
  }
  return out;
}

Vec cdf_values(const FittedModel& model, const Vec& y, const Mat& design) {
  if (y.size() != design.rows()) throw DataError("response length differs from design rows");
  Vec out(design.rows());
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    out[i] = conditional_cdf(model, y[i], design.row(i).transpose());
  }
  return out;
}

std::optional<Moments> moments(const FittedModel& model, const VecRef& x) {
  if (const auto* tw = std::get_if<TweedieFit>(&model)) {
    const double mu = exp_capped(linear(tw->coef, x));
    return Moments{mu, tw->phi * std::pow(mu, tw->power)};
  }
  if (const auto* tp = std::get_if<TwoPartFit>(&model)) {
    if (const auto* g = std::get_if<GammaPart>(&tp->positive)) {
      const double p0 = inv_logit(linear(tp->zero_coef, x));
      const double mu = exp_capped(linear(g->coef, x));
      const double mean = (1.0 - p0) * mu;
      const double second = (1.0 - p0) * (g->dispersion + 1.0) * mu * mu;
      return Moments{mean, second - mean * mean};
    }
  }
  return std::nullopt;
}

TwoPartResult fit_two_part(const Dataset& data, PositiveFamily family) {
  data.validate();
  const Vec zeros = data.zero_indicator();
  LogisticResult zero = fit_logistic(data.design, zeros);
  const Dataset pos = data.positive_part();
  TwoPartResult out;
  out.fit.zero_coef = zero.coef;
  out.zero_report = zero.report;
  if (family == PositiveFamily::gamma) {
    GammaGlmResult g = fit_gamma_glm(pos.design, pos.response);
    out.fit.positive = GammaPart{g.coef, g.dispersion};
    out.positive_report = g.report;
  } else {
    GB2Result g = fit_gb2(pos.design, pos.response);
    out.fit.positive = g.part;
    out.positive_report = g.report;
  }
  out.log_likelihood = two_part_log_likelihood(out.fit, data.design, data.response);
  return out;
}

double two_part_log_likelihood(const TwoPartFit& fit, const Mat& design, const Vec& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const Vec x = design.row(i).transpose();
    const double eta0 = linear(fit.zero_coef, x);
    const double log_p0 = eta0 >= 0 ? -std::log1p(std::exp(-eta0)) : eta0 - std::log1p(std::exp(eta0));
    const double log_p1 = log_p0 - eta0;
    if (y[i] == 0.0) {
      ll += log_p0;
      continue;
    }
    ll += log_p1;
    ll += std::visit(
        overloaded{
            [&](const GammaPart& g) {
              const double shape = 1.0 / g.dispersion;
              return math::gamma_logpdf(y[i], {shape, exp_capped(linear(g.coef, x)) / shape});
            },
            [&](const GB2Part& g) {
              return math::gb2_logpdf(y[i], {g.a, exp_capped(linear(g.coef, x)), g.p, g.q});
            },
        },
        fit.positive);
  }
  return ll;
}

}  // namespace semidiag::models

namespace semidiag::models {

std::optional<ModelFamily> parse_family(const std::string& name) {
  if (name == "tweedie") return ModelFamily::tweedie;
  if (name == "twopart-gamma") return ModelFamily::twopart_gamma;
  if (name == "twopart-gb2") return ModelFamily::twopart_gb2;
  if (name == "tobit") return ModelFamily::tobit;
  return std::nullopt;
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::tweedie: return "tweedie";
    case ModelFamily::twopart_gamma: return "twopart-gamma";
    case ModelFamily::twopart_gb2: return "twopart-gb2";
    case ModelFamily::tobit: return "tobit";
  }
  return "unknown";
}

FitOutcome fit_model(ModelFamily family, const Dataset& data, double limit) {
  data.validate();
  switch (family) {
    case ModelFamily::tweedie: {
      TweedieResult r = fit_tweedie(data.design, data.response);
      FitOutcome out{r.fit, r.report, {{"tweedie", r.report}}, std::move(r.profile)};
      return out;
    }
    case ModelFamily::twopart_gamma:
    case ModelFamily::twopart_gb2: {
      TwoPartResult r = fit_two_part(data, family == ModelFamily::twopart_gamma
                                               ? PositiveFamily::gamma
                                               : PositiveFamily::gb2);
      FitReport combined;
      combined.log_likelihood = r.log_likelihood;
      combined.iterations = r.zero_report.iterations + r.positive_report.iterations;
      combined.converged = r.zero_report.converged && r.positive_report.converged;
      combined.warnings = r.positive_report.warnings;
      return FitOutcome{r.fit, combined, {{"zero", r.zero_report}, {"positive", r.positive_report}}, {}};
    }
    case ModelFamily::tobit: {
      TobitResult r = fit_tobit(data.design, data.response, limit);
      return FitOutcome{r.fit, r.report, {{"tobit", r.report}}, {}};
    }
  }
  throw DomainError("unknown model family");
}

}  // namespace semidiag::models
