#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "semidiag/diagnostics.hpp"
#include "semidiag/error.hpp"
#include "semidiag/io.hpp"
#include "semidiag/models.hpp"
#include "semidiag/residuals.hpp"
#include "semidiag/simulation.hpp"

namespace semidiag::cli {
namespace fs = std::filesystem;
namespace {

struct FitArgs {
  std::string input;
  std::string response = "y";
  std::vector<std::string> covariates;
  std::string model;
  std::string out_dir;
  double limit = 0.0;
};

struct ResidualArgs {
  std::string input;
  std::string model_file;
  std::string response = "y";
  std::string out_dir;
  std::uint64_t seed = 1;
};

struct QQArgs {
  std::string input;
  std::string column = "residual";
  std::string scale = "uniform";
  std::string name = "qq";
  std::string title;
  std::string out_dir;
};

// Simulation flags are kept as text and fed through the scenario parser so
// flag and config-file values get identical validation.
struct SimulateArgs {
  std::string config;
  std::string out_dir;
  bool write_data = false;
  bool all_figures = false;
  std::vector<std::pair<std::string, std::string>> settings;
};

std::string fmt(double v) { return io::format_double(v); }

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << content;
  if (!f) throw DataError("write failed for " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_qq_pair(const fs::path& dir, const std::string& stem, const diagnostics::QQData& qq,
                   const std::string& title) {
  std::ostringstream csv;
  diagnostics::write_qq_csv(csv, qq);
  write_file(dir / (stem + ".csv"), csv.str());
  write_file(dir / (stem + ".svg"), diagnostics::render_qq_svg(qq, title));
}

// --- fit ---------------------------------------------------------------------------

void append_coef_table(std::ostringstream& out, const std::string& heading,
                       const std::vector<std::string>& names, const Eigen::VectorXd& coef,
                       const std::optional<Eigen::VectorXd>& se) {
  out << '\n' << heading << '\n';
  char line[160];
  std::snprintf(line, sizeof line, "  %-20s %16s %16s\n", "term", "estimate", "std_error");
  out << line;
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    const std::string se_text = se && j < se->size() ? fmt_short((*se)[j]) : "NA";
    std::snprintf(line, sizeof line, "  %-20s %16s %16s\n",
                  names[static_cast<std::size_t>(j)].c_str(), fmt_short(coef[j]).c_str(),
                  se_text.c_str());
    out << line;
  }
}

const models::FitReport* component(const models::FitOutcome& fit, const std::string& name) {
  for (const auto& [key, report] : fit.components) {
    if (key == name) return &report;
  }
  return nullptr;
}

std::string fit_report_text(const models::FitOutcome& fit, const Dataset& data) {
  std::ostringstream out;
  out << "family: " << models::family_name(fit.model) << '\n';
  out << "observations: " << data.rows() << '\n';
  out << "zero_fraction: " << fmt_short(data.zero_indicator().mean()) << '\n';
  out << "log_likelihood: " << fmt(fit.report.log_likelihood) << '\n';
  out << "iterations: " << fit.report.iterations << '\n';
  out << "converged: " << (fit.report.converged ? "yes" : "no") << '\n';
  const auto& names = data.column_names;
  const auto se_of = [&](const std::string& part) -> std::optional<Eigen::VectorXd> {
    const auto* r = component(fit, part);
    return r ? r->coefficient_standard_errors : std::nullopt;
  };
  if (const auto* tp = std::get_if<models::TwoPartFit>(&fit.model)) {
    append_coef_table(out, "zero part (logistic, P(y = 0))", names, tp->zero_coef, se_of("zero"));
    if (const auto* g = std::get_if<models::GammaPart>(&tp->positive)) {
      append_coef_table(out, "positive part (gamma, log mean)", names, g->coef, se_of("positive"));
      out << "  dispersion " << fmt_short(g->dispersion) << '\n';
    } else {
      const auto& b = std::get<models::GB2Part>(tp->positive);
      append_coef_table(out, "positive part (GB2, log scale)", names, b.coef, se_of("positive"));
      out << "  a " << fmt_short(b.a) << "\n  p " << fmt_short(b.p) << "\n  q " << fmt_short(b.q)
          << '\n';
    }
  } else if (const auto* tw = std::get_if<models::TweedieFit>(&fit.model)) {
    append_coef_table(out, "tweedie (log mean)", names, tw->coef, se_of("tweedie"));
    out << "  phi " << fmt_short(tw->phi) << "\n  power " << fmt_short(tw->power) << '\n';
    if (!fit.profile.empty()) {
      out << "\npower profile\n  power phi log_likelihood\n";
      for (const auto& p : fit.profile) {
        out << "  " << fmt_short(p.power) << ' ' << fmt_short(p.phi) << ' '
            << fmt_short(p.log_likelihood) << '\n';
      }
    }
  } else {
    const auto& tb = std::get<models::TobitFit>(fit.model);
    append_coef_table(out, "tobit (latent mean)", names, tb.coef, se_of("tobit"));
    out << "  sigma " << fmt_short(tb.sigma) << "\n  limit " << fmt_short(tb.limit) << '\n';
  }
  if (!fit.report.warnings.empty()) {
    out << "\nwarnings\n";
    for (const auto& w : fit.report.warnings) out << "  " << w << '\n';
  }
  return out.str();
}

int cmd_fit(const FitArgs& args, std::ostream& out) {
  const auto family = models::parse_family(args.model);
  if (!family) throw DomainError("unknown model '" + args.model + "'");
  const Dataset data = io::load_csv(fs::path(args.input), args.response, args.covariates);
  const fs::path dir = prepare_dir(args.out_dir);
  const models::FitOutcome fit = models::fit_model(*family, data, args.limit);
  write_file(dir / "fit_report.txt", fit_report_text(fit, data));
  if (!fit.report.converged) throw FitError("fit did not converge; see fit_report.txt");
  std::ostringstream model;
  io::write_model(model, io::ModelFile{fit.model, data.column_names});
  write_file(dir / "model.txt", model.str());
  out << "fitted " << models::family_name(fit.model) << " on " << data.rows()
      << " rows, log-likelihood " << fmt_short(fit.report.log_likelihood) << '\n';
  return kOk;
}

// --- residuals / validate ---------------------------------------------------------------

Dataset load_for_model(const std::string& path, const std::string& response,
                       const io::ModelFile& mf) {
  if (mf.column_names.empty() || mf.column_names.front() != kInterceptName) {
    throw DataError("model file: first column must be " + std::string(kInterceptName));
  }
  const std::vector<std::string> covariates(mf.column_names.begin() + 1, mf.column_names.end());
  Dataset data = io::load_csv(fs::path(path), response, covariates);
  if (data.rows() == 0) throw DataError(path + " has no data rows");
  if (data.rows() < 2) throw DataError(path + " needs at least 2 rows for QQ output");
  if (data.cols() != models::dimension(mf.model)) {
    throw DataError("model expects " + std::to_string(models::dimension(mf.model)) +
                    " columns but data has " + std::to_string(data.cols()));
  }
  return data;
}

bool is_censored(const models::FittedModel& model, double y) {
  if (const auto* tb = std::get_if<models::TobitFit>(&model)) return y <= tb->limit;
  return y == 0.0;
}

void emit_residual_outputs(const fs::path& dir, const std::string& prefix,
                           const residuals::ResidualSet& rs, const models::FittedModel& model,
                           const Dataset& data, std::uint64_t seed) {
  const std::size_t n = rs.size();
  {
    std::ostringstream csv;
    csv << "index,p0_hat,cdf_value,residual,residual_normal\n";
    for (std::size_t i = 0; i < n; ++i) {
      csv << i << ',' << fmt(rs.p0_hat[i]) << ',' << fmt(rs.cdf_value[i]) << ','
          << fmt(rs.proposed[i]) << ',' << fmt(rs.normal_scale[i]) << '\n';
    }
    write_file(dir / (prefix + "residuals.csv"), csv.str());
  }
  write_qq_pair(dir, prefix + "qq_uniform", diagnostics::qq_against_uniform(rs.proposed),
                "Proposed residuals (uniform scale)");
  write_qq_pair(dir, prefix + "qq_normal", diagnostics::qq_against_normal(rs.normal_scale),
                "Proposed residuals (normal scale)");
  {
    std::ostringstream csv;
    diagnostics::write_histogram_csv(csv, diagnostics::histogram_unit_interval(rs.p0_hat));
    write_file(dir / (prefix + "p0_histogram.csv"), csv.str());
  }
  {
    std::ostringstream report;
    diagnostics::write_uniformity_report(report, diagnostics::ks_uniform(rs.proposed));
    write_file(dir / (prefix + "uniformity.txt"), report.str());
  }

  // Baselines: Cox-Snell, jittered, and Pearson/deviance where the family has moments.
  std::vector<bool> zero(n);
  std::vector<double> y(n), mean, variance;
  const bool has_moments = models::moments(model, data.design.row(0).transpose()).has_value();
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    y[i] = data.response[r];
    zero[i] = is_censored(model, y[i]);
    if (has_moments) {
      const auto m = models::moments(model, data.design.row(r).transpose());
      mean.push_back(m->mean);
      variance.push_back(m->variance);
    }
  }
  const std::vector<double> cox = residuals::cox_snell(rs.cdf_value);
  const std::vector<double> jitter =
      residuals::randomized_quantile_residuals(rs.p0_hat, rs.cdf_value, zero, seed);
  std::vector<double> pearson, deviance;
  if (has_moments) pearson = residuals::pearson_residuals(y, mean, variance);
  if (const auto* tw = std::get_if<models::TweedieFit>(&model)) {
    deviance = residuals::tweedie_deviance_residuals(y, mean, tw->phi, tw->power);
  }
  std::ostringstream csv;
  csv << "index,cox_snell,randomized_quantile";
  if (!pearson.empty()) csv << ",pearson";
  if (!deviance.empty()) csv << ",deviance";
  csv << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    csv << i << ',' << fmt(cox[i]) << ',' << fmt(jitter[i]);
    if (!pearson.empty()) csv << ',' << fmt(pearson[i]);
    if (!deviance.empty()) csv << ',' << fmt(deviance[i]);
    csv << '\n';
  }
  write_file(dir / (prefix + "baselines.csv"), csv.str());
}

int cmd_residuals(const ResidualArgs& args, bool held_out, std::ostream& out) {
  const io::ModelFile mf = io::read_model(fs::path(args.model_file));
  const Dataset data = load_for_model(args.input, args.response, mf);
  const Eigen::VectorXd p0 = models::p0_values(mf.model, data.design);
  const Eigen::VectorXd cdf = models::cdf_values(mf.model, data.response, data.design);
  const std::span<const double> p0_span(p0.data(), static_cast<std::size_t>(p0.size()));
  const std::span<const double> cdf_span(cdf.data(), static_cast<std::size_t>(cdf.size()));
  const residuals::ResidualSet rs = held_out ? residuals::out_of_sample_errors(p0_span, cdf_span)
                                             : residuals::proposed_residuals(p0_span, cdf_span);
  const fs::path dir = prepare_dir(args.out_dir);
  emit_residual_outputs(dir, held_out ? "oos_" : "", rs, mf.model, data, args.seed);
  const auto ks = diagnostics::ks_uniform(rs.proposed);
  out << (held_out ? "out-of-sample errors" : "residuals") << " for " << rs.size()
      << " rows, KS " << fmt_short(ks.ks_statistic) << '\n';
  return kOk;
}

// --- simulate ---------------------------------------------------------------------------

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  sim::ScenarioConfig config;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw DomainError("cannot open scenario file " + args.config);
    config = sim::parse_scenario(in);
  }
  for (const auto& [key, value] : args.settings) sim::apply_setting(config, key, value);
  config.validate();

  const sim::ScenarioResult result = sim::run_scenario(config);
  const fs::path dir = prepare_dir(args.out_dir);
  {
    std::ostringstream csv;
    sim::write_replications_csv(csv, result);
    write_file(dir / "replications.csv", csv.str());
  }
  {
    std::ostringstream csv;
    sim::write_aggregate_csv(csv, result);
    write_file(dir / "aggregate.csv", csv.str());
  }
  if (args.write_data) {
    std::ostringstream csv;
    io::write_csv(csv, sim::generate(config, config.seed));
    write_file(dir / "data_rep0.csv", csv.str());
  }
  for (const auto& fig : result.figures) {
    const std::string arm = sim::to_string(fig.arm);
    const auto& rs = fig.residuals;
    write_qq_pair(dir, "qq_" + arm, diagnostics::qq_against_uniform(rs.proposed),
                  arm + ": proposed residuals");
    if (!args.all_figures) continue;
    write_qq_pair(dir, "qq_" + arm + "_normal", diagnostics::qq_against_normal(rs.normal_scale),
                  arm + ": proposed residuals (normal scale)");
    write_qq_pair(dir, "qq_" + arm + "_cox_snell", diagnostics::qq_against_uniform(rs.cdf_value),
                  arm + ": Cox-Snell residuals");
    if (!fig.deviance.empty()) {
      write_qq_pair(dir, "qq_" + arm + "_deviance", diagnostics::qq_against_normal(fig.deviance),
                    arm + ": deviance residuals");
    }
    if (!fig.pearson.empty()) {
      write_qq_pair(dir, "qq_" + arm + "_pearson", diagnostics::qq_against_normal(fig.pearson),
                    arm + ": Pearson residuals");
    }
  }
  for (const auto& agg : result.aggregate) {
    out << sim::to_string(agg.arm) << ": mean KS " << fmt_short(agg.mean_ks) << " over "
        << agg.fitted << " fits, " << agg.failures << " failures\n";
  }
  return kOk;
}

// --- qq ---------------------------------------------------------------------------------

int cmd_qq(const QQArgs& args, std::ostream& out) {
  const std::vector<double> values = io::read_column(fs::path(args.input), args.column);
  if (values.size() < 2) throw DataError("column '" + args.column + "' needs at least 2 values");
  const bool normal = args.scale == "normal";
  if (!normal) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < 0.0 || values[i] > 1.0) {
        throw DataError("uniform-scale QQ needs values in [0, 1]; row " + std::to_string(i + 1) +
                        " is " + fmt_short(values[i]));
      }
    }
  }
  const diagnostics::QQData qq =
      normal ? diagnostics::qq_against_normal(values) : diagnostics::qq_against_uniform(values);
  const fs::path dir = prepare_dir(args.out_dir);
  write_qq_pair(dir, args.name, qq, args.title.empty() ? args.column : args.title);
  out << "wrote " << args.name << ".csv and " << args.name << ".svg\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit semicontinuous regression models and check them with uniformity residuals",
               "semidiag"};
  app.require_subcommand(1);
  const std::vector<std::string> families{"tweedie", "twopart-gamma", "twopart-gb2", "tobit"};

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model family and write model.txt");
  fit_cmd->add_option("--input", fit.input, "Training CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--response", fit.response, "Response column")->capture_default_str();
  fit_cmd->add_option("--covariates", fit.covariates, "Covariate columns (default: all others)")
      ->delimiter(',');
  fit_cmd->add_option("--model", fit.model, "Model family")
      ->required()
      ->check(CLI::IsMember(families));
  fit_cmd->add_option("--out-dir", fit.out_dir, "Output directory")->required();
  fit_cmd->add_option("--limit", fit.limit, "Tobit censoring limit")->capture_default_str();

  ResidualArgs res;
  auto* res_cmd = app.add_subcommand("residuals", "Residuals and QQ outputs for a fitted model");
  res_cmd->add_option("--input", res.input, "Data CSV")->required()->check(CLI::ExistingFile);
  res_cmd->add_option("--model-file", res.model_file, "Model written by fit")
      ->required()
      ->check(CLI::ExistingFile);
  res_cmd->add_option("--response", res.response, "Response column")->capture_default_str();
  res_cmd->add_option("--out-dir", res.out_dir, "Output directory")->required();
  res_cmd->add_option("--seed", res.seed, "Seed for the jittered baseline")->capture_default_str();

  ResidualArgs val;
  auto* val_cmd =
      app.add_subcommand("validate", "Out-of-sample errors on held-out data (outputs prefixed oos_)");
  val_cmd->add_option("--holdout", val.input, "Held-out CSV")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("--model-file", val.model_file, "Model written by fit")
      ->required()
      ->check(CLI::ExistingFile);
  val_cmd->add_option("--response", val.response, "Response column")->capture_default_str();
  val_cmd->add_option("--out-dir", val.out_dir, "Output directory")->required();
  val_cmd->add_option("--seed", val.seed, "Seed for the jittered baseline")->capture_default_str();

  SimulateArgs simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a replicated simulation scenario");
  sim_cmd->add_option("--config", simulate.config, "key=value scenario file")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--out-dir", simulate.out_dir, "Output directory")->required();
  sim_cmd->add_flag("--write-data", simulate.write_data,
                    "Also write replication 0's dataset as data_rep0.csv");
  sim_cmd->add_flag("--all-figures", simulate.all_figures,
                    "Add normal-scale, Cox-Snell, deviance and Pearson QQ plots");
  struct SimFlag {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const SimFlag sim_flags[] = {
      {"--generator", "generator", "two-part-gamma, tobit or figure1"},
      {"--n", "n", "Observations per replication"},
      {"--seed", "seed", "Base seed; replication r uses seed + r"},
      {"--reps", "reps", "Replications"},
      {"--threads", "threads", "Worker threads (0: SEMIDIAG_THREADS or all cores)"},
      {"--arms", "arms", "Comma list of twopart-gamma, twopart-gb2, tweedie, tobit, tobit-missing"},
      {"--beta0-zero", "beta0_zero", "Zero-part intercept (two-part generator)"},
      {"--dispersion", "dispersion", "Gamma dispersion (two-part generator)"},
      {"--sd", "sd", "Latent noise sd (tobit generator)"},
      {"--halfwidth", "halfwidth", "Covariate halfwidth (tobit generator)"},
      {"--limit", "limit", "Censoring limit (tobit generator)"},
      {"--tw-power", "tw_power", "Tweedie power (figure1 generator)"},
      {"--tw-phi", "tw_phi", "Tweedie dispersion (figure1 generator)"},
      {"--tw-intercept", "tw_intercept", "Log-mean intercept (figure1 generator)"},
      {"--tw-slope", "tw_slope", "Log-mean slope (figure1 generator)"},
  };
  std::vector<std::string> sim_values(std::size(sim_flags));
  std::vector<CLI::Option*> sim_opts;
  for (std::size_t i = 0; i < std::size(sim_flags); ++i) {
    sim_opts.push_back(sim_cmd->add_option(sim_flags[i].flag, sim_values[i], sim_flags[i].help));
  }

  QQArgs qq;
  auto* qq_cmd = app.add_subcommand("qq", "QQ CSV and SVG for one CSV column");
  qq_cmd->add_option("--input", qq.input, "CSV file")->required()->check(CLI::ExistingFile);
  qq_cmd->add_option("--column", qq.column, "Column to plot")->capture_default_str();
  qq_cmd->add_option("--scale", qq.scale, "Reference distribution")
      ->check(CLI::IsMember({"uniform", "normal"}))
      ->capture_default_str();
  qq_cmd->add_option("--name", qq.name, "Output file stem")->capture_default_str();
  qq_cmd->add_option("--title", qq.title, "Plot title (default: column name)");
  qq_cmd->add_option("--out-dir", qq.out_dir, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (res_cmd->parsed()) return cmd_residuals(res, false, out);
    if (val_cmd->parsed()) return cmd_residuals(val, true, out);
    if (sim_cmd->parsed()) {
      for (std::size_t i = 0; i < sim_opts.size(); ++i) {
        if (sim_opts[i]->count() > 0) simulate.settings.emplace_back(sim_flags[i].key, sim_values[i]);
      }
      return cmd_simulate(simulate, out);
    }
    if (qq_cmd->parsed()) return cmd_qq(qq, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << '\n';
    return kFit;
  } catch (const LinAlgError& e) {
    err << "fit error: " << e.what() << '\n';
    return kFit;
  } catch (const EvaluationError& e) {
    err << "fit error: " << e.what() << '\n';
    return kFit;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace semidiag::cli
