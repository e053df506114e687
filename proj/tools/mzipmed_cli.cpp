// Command-line front end: fit / mediate / simulate subcommands with CSV input
// and JSON output. Exit codes: 0 ok, 2 input error, 3 non-convergence,
// 4 resampling failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mzipmed/mzipmed.hpp"

namespace {

using nlohmann::json;
constexpr int kSchemaVersion = 1;

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json effect_json(const mzipmed::Effect& e) {
  return json{{"estimate", e.estimate},
              {"se", e.se},
              {"ci", json::array({e.ci_low, e.ci_high})}};
}

std::string se_method_name(mzipmed::SeMethod m) {
  switch (m) {
    case mzipmed::SeMethod::delta_model: return "delta_model";
    case mzipmed::SeMethod::delta_robust: return "delta_robust";
    default: return "bootstrap";
  }
}

struct CsvInput {
  std::string path = "-";
  mzipmed::ColumnRoles roles;

  void attach(CLI::App* cmd) {
    cmd->add_option("csv", path, "input CSV path, or - for stdin")->required();
    cmd->add_option("--outcome", roles.outcome, "outcome column")->required();
    cmd->add_option("--exposure", roles.exposure, "exposure column")->required();
    cmd->add_option("--mediator", roles.mediator, "mediator column")->required();
    cmd->add_option("--covariates", roles.covariates,
                    "covariate columns (repeat or comma separated)")
        ->delimiter(',');
  }

  mzipmed::ResolvedData load() const {
    if (path == "-") return mzipmed::resolve_roles(mzipmed::read_csv(std::cin), roles);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mzipmed::ParseError("cannot open '" + path + "'");
    return mzipmed::resolve_roles(mzipmed::read_csv(in), roles);
  }
};

mzipmed::SeMethod parse_se_method(const std::string& s) {
  if (s == "delta_model" || s == "delta") return mzipmed::SeMethod::delta_model;
  if (s == "delta_robust" || s == "robust")
    return mzipmed::SeMethod::delta_robust;
  if (s == "bootstrap") return mzipmed::SeMethod::bootstrap;
  throw mzipmed::ParseError("unknown SE method '" + s + "'");
}

int cmd_fit(const CsvInput& input, const std::string& family, bool interaction,
            const std::string& out_path) {
  const mzipmed::ResolvedData data = input.load();
  const Eigen::MatrixXd zy = mzipmed::outcome_design(
      data.exposure, data.mediator, data.covariates, interaction);
  json out{{"schema_version", kSchemaVersion},
           {"family", family},
           {"n", data.outcome.size()},
           {"dropped_rows", data.dropped_rows}};
  bool converged = false;
  if (family == "mzip") {
    const mzipmed::MzipFit fit = mzipmed::mzip_fit(zy, data.outcome);
    converged = fit.converged;
    const Eigen::Index p = fit.p;
    out["alpha"] = to_json(fit.alpha);
    out["gamma"] = to_json(fit.gamma);
    out["se_model"] = json{
        {"gamma", to_json(fit.cov_joint.diagonal().head(p).cwiseSqrt())},
        {"alpha", to_json(fit.cov_joint.diagonal().tail(p).cwiseSqrt())}};
    out["se_robust"] = json{
        {"gamma", to_json(fit.cov_joint_robust.diagonal().head(p).cwiseSqrt())},
        {"alpha", to_json(fit.cov_joint_robust.diagonal().tail(p).cwiseSqrt())}};
    out["loglik"] = fit.loglik;
    out["converged"] = fit.converged;
  } else if (family == "poisson") {
    const mzipmed::GlmFit fit = mzipmed::fit_poisson(zy, data.outcome);
    converged = fit.converged;
    out["alpha"] = to_json(fit.coefficients);
    out["se_model"] = json{{"alpha", to_json(fit.cov_model.diagonal().cwiseSqrt())}};
    out["se_robust"] =
        json{{"alpha", to_json(fit.cov_robust.diagonal().cwiseSqrt())}};
    out["loglik"] = fit.loglik;
    out["converged"] = fit.converged;
  } else {
    throw mzipmed::ParseError("unknown family '" + family + "'");
  }
  if (out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    f << out.dump(2) << "\n";
  }
  return converged ? 0 : 3;
}

int cmd_mediate(const CsvInput& input, mzipmed::MediationSpec spec,
                const std::vector<double>& cvals, mzipmed::MediateOptions opt,
                const std::string& out_path) {
  const mzipmed::ResolvedData data = input.load();
  if (!cvals.empty()) {
    spec.c.resize(static_cast<Eigen::Index>(cvals.size()));
    for (std::size_t i = 0; i < cvals.size(); ++i)
      spec.c[static_cast<Eigen::Index>(i)] = cvals[i];
  }
  const mzipmed::MediationResult res = mzipmed::mediate(data, spec, opt);
  json out{{"schema_version", kSchemaVersion},
           {"scale", spec.scale == mzipmed::EffectScale::ratio ? "ratio"
                                                               : "difference"},
           {"se_method", se_method_name(res.se_method)},
           {"nde", effect_json(res.effects.nde)},
           {"nie", effect_json(res.effects.nie)},
           {"cde", effect_json(res.effects.cde)},
           {"te", effect_json(res.effects.te)},
           {"pm", res.effects.pm},
           {"diagnostics",
            json{{"n", res.n},
                 {"dropped_rows", res.dropped_rows},
                 {"alpha", to_json(res.alpha)},
                 {"gamma", to_json(res.gamma)},
                 {"theta", to_json(res.theta)},
                 {"sigma2", res.sigma2},
                 {"outcome_loglik", res.outcome_loglik},
                 {"outcome_converged", res.outcome_converged},
                 {"mediator_converged", res.mediator_converged},
                 {"bootstrap_reps", res.bootstrap_reps},
                 {"bootstrap_failures", res.bootstrap_failures}}}};
  if (out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    f << out.dump(2) << "\n";
  }
  return res.outcome_converged && res.mediator_converged ? 0 : 3;
}

std::string method_name(mzipmed::OutcomeFamily m) {
  return m == mzipmed::OutcomeFamily::mzip ? "mzip" : "poisson";
}

int cmd_simulate(const std::string& preset, Eigen::Index n, int reps,
                 std::uint64_t seed, int threads, const std::string& scale,
                 const std::vector<std::string>& methods,
                 const std::vector<std::string>& se_methods,
                 const std::string& out_path) {
  mzipmed::ScenarioConfig cfg = mzipmed::scenario_preset(preset);
  cfg.n = n;
  mzipmed::MediationSpec spec;
  spec.scale = scale == "difference" ? mzipmed::EffectScale::difference
                                     : mzipmed::EffectScale::ratio;
  if (scale != "ratio" && scale != "difference")
    throw mzipmed::ParseError("scale must be 'ratio' or 'difference'");
  std::vector<mzipmed::OutcomeFamily> ms;
  for (const std::string& m : methods) {
    if (m == "mzip") ms.push_back(mzipmed::OutcomeFamily::mzip);
    else if (m == "poisson") ms.push_back(mzipmed::OutcomeFamily::poisson);
    else throw mzipmed::ParseError("unknown method '" + m + "'");
  }
  std::vector<mzipmed::SeMethod> ses;
  for (const std::string& s : se_methods) ses.push_back(parse_se_method(s));

  const mzipmed::SimulationReport report =
      mzipmed::run_study(cfg, reps, ms, ses, spec, seed, threads);

  std::ostringstream csv;
  csv << "method,effect,se_method,median_pct_bias,coverage,power,median_se,"
         "empirical_se,reps_used\n";
  csv.precision(10);
  json rows = json::array();
  for (const mzipmed::SimulationRow& row : report.rows) {
    csv << method_name(row.method) << ',' << row.effect << ','
        << se_method_name(row.se_method) << ',' << row.median_pct_bias << ','
        << row.coverage << ',' << row.power << ',' << row.median_se << ',';
    if (std::isnan(row.empirical_se)) csv << "";
    else csv << row.empirical_se;
    csv << ',' << row.reps_used << '\n';
    rows.push_back(json{{"method", method_name(row.method)},
                        {"effect", row.effect},
                        {"se_method", se_method_name(row.se_method)},
                        {"median_pct_bias", row.median_pct_bias},
                        {"coverage", row.coverage},
                        {"power", row.power},
                        {"median_se", row.median_se},
                        {"empirical_se",
                         std::isnan(row.empirical_se)
                             ? json()
                             : json(row.empirical_se)},
                        {"reps_used", row.reps_used}});
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    f << csv.str();
  }
  const json out{{"schema_version", kSchemaVersion},
                 {"preset", preset},
                 {"n", n},
                 {"reps", reps},
                 {"seed", seed},
                 {"scale", scale},
                 {"rows", rows}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marginalized zero-inflated Poisson mediation analysis"};
  app.require_subcommand(1);

  CsvInput fit_input;
  std::string fit_family = "mzip";
  bool fit_interaction = false;
  std::string fit_out;
  CLI::App* fit = app.add_subcommand("fit", "fit the outcome model");
  fit_input.attach(fit);
  fit->add_option("--family", fit_family, "outcome family: mzip or poisson");
  fit->add_flag("--interaction", fit_interaction,
                "include an exposure-mediator interaction");
  fit->add_option("--out", fit_out, "write JSON to this path");

  CsvInput med_input;
  mzipmed::MediationSpec spec;
  std::vector<double> cvals;
  std::string med_family = "mzip", med_mediator = "continuous",
              med_scale = "ratio", med_se = "delta_model", med_out;
  mzipmed::MediateOptions med_opt;
  CLI::App* med = app.add_subcommand("mediate", "estimate mediation effects");
  med_input.attach(med);
  med->add_option("--x", spec.x, "treated exposure level");
  med->add_option("--xstar", spec.x_star, "reference exposure level");
  med->add_option("--cvals", cvals,
                  "covariate evaluation values (default: column means)")
      ->delimiter(',');
  med->add_option("--m-cde", spec.m_cde, "mediator level for the CDE");
  med->add_option("--mediator-type", med_mediator, "continuous or binary");
  med->add_option("--scale", med_scale, "ratio or difference");
  med->add_flag("--interaction", spec.interaction,
                "include an exposure-mediator interaction");
  med->add_option("--se", med_se, "delta_model, delta_robust, or bootstrap");
  med->add_option("--boot-reps", med_opt.bootstrap_reps, "bootstrap replicates");
  med->add_option("--seed", med_opt.seed, "bootstrap RNG seed");
  med->add_option("--level", spec.level, "confidence level");
  med->add_option("--family", med_family, "outcome family: mzip or poisson");
  med->add_option("--threads", med_opt.threads, "bootstrap worker threads");
  med->add_option("--out", med_out, "write JSON to this path");

  std::string sim_preset, sim_scale = "ratio", sim_out;
  Eigen::Index sim_n = 1000;
  int sim_reps = 500;
  std::uint64_t sim_seed = 1;
  int sim_threads = mzipmed::default_thread_count();
  std::vector<std::string> sim_methods{"mzip", "poisson"};
  std::vector<std::string> sim_se{"delta_model"};
  CLI::App* sim = app.add_subcommand("simulate", "run a Monte Carlo study");
  sim->add_option("--preset", sim_preset, "scenario preset name")->required();
  sim->add_option("--n", sim_n, "sample size per replicate");
  sim->add_option("--reps", sim_reps, "number of replicates");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--threads", sim_threads, "worker threads");
  sim->add_option("--scale", sim_scale, "ratio or difference");
  sim->add_option("--methods", sim_methods, "outcome models to compare")
      ->delimiter(',');
  sim->add_option("--se", sim_se, "SE methods to evaluate")->delimiter(',');
  sim->add_option("--out", sim_out, "write the report CSV to this path");
  sim->set_config("--config", "", "config file with key=value lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_input, fit_family, fit_interaction, fit_out);
    if (med->parsed()) {
      spec.mediator_type = med_mediator == "binary"
                               ? mzipmed::MediatorType::binary
                               : mzipmed::MediatorType::continuous;
      if (med_mediator != "continuous" && med_mediator != "binary")
        throw mzipmed::ParseError("mediator-type must be continuous or binary");
      spec.scale = med_scale == "difference" ? mzipmed::EffectScale::difference
                                             : mzipmed::EffectScale::ratio;
      if (med_scale != "ratio" && med_scale != "difference")
        throw mzipmed::ParseError("scale must be ratio or difference");
      spec.se_method = parse_se_method(med_se);
      med_opt.family = med_family == "poisson" ? mzipmed::OutcomeFamily::poisson
                                               : mzipmed::OutcomeFamily::mzip;
      if (med_family != "mzip" && med_family != "poisson")
        throw mzipmed::ParseError("family must be mzip or poisson");
      return cmd_mediate(med_input, spec, cvals, med_opt, med_out);
    }
    return cmd_simulate(sim_preset, sim_n, sim_reps, sim_seed, sim_threads,
                        sim_scale, sim_methods, sim_se, sim_out);
  } catch (const mzipmed::ParseError& e) {
    json err{{"error", e.what()}};
    if (e.row > 0) err["row"] = e.row;
    if (!e.column.empty()) err["column"] = e.column;
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const mzipmed::TooManyFailuresError& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 4;
  } catch (const mzipmed::NotConvergedError& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 3;
  } catch (const mzipmed::DegenerateOutcomeError& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
}
