#ifndef MZIPMED_SIMULATE_HPP
#define MZIPMED_SIMULATE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "effects.hpp"
#include "errors.hpp"
#include "mediate.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace mzipmed {

enum class OutcomeGenFamily { zip, zinb };

struct ScenarioConfig {
  Eigen::VectorXd gamma;  // excess-zero coefficients, outcome design order
  Eigen::VectorXd alpha;  // overall-mean coefficients, outcome design order
  Eigen::VectorXd theta;  // mediator model coefficients
  bool mediator_binary = false;
  double sigma2 = 3.0;  // continuous mediator only
  bool interaction = false;
  OutcomeGenFamily outcome_family = OutcomeGenFamily::zip;
  double omega = 2.0;  // zinb dispersion
  Eigen::Index n = 1000;
  double c_eval = 2.0;  // covariate value for conditional truths
};

// Named presets matching the simulation scenarios (continuous-mediator
// scenarios 1-5, binary 1-3, and the over-dispersed variant of scenario 2).
inline ScenarioConfig scenario_preset(const std::string& name) {
  const auto vec4 = [](double a, double b, double c, double d) {
    Eigen::VectorXd v(4);
    v << a, b, c, d;
    return v;
  };
  const auto vec3 = [](double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
  };
  ScenarioConfig cfg;
  cfg.theta = vec3(0.0, 1.0, 0.5);
  cfg.sigma2 = 3.0;
  if (name == "scenario1") {
    cfg.gamma = vec4(0.35, -1.5, 0.0, 0.25);
    cfg.alpha = vec4(-0.6, 0.41, 0.15, 0.25);
  } else if (name == "scenario2") {
    cfg.gamma = vec4(0.35, -1.5, 0.25, 0.25);
    cfg.alpha = vec4(-0.6, 0.41, 0.15, 0.25);
  } else if (name == "scenario3") {
    cfg.gamma = vec4(0.35, -0.45, 0.0, 0.25);
    cfg.alpha = vec4(-0.6, 0.41, 0.15, 0.25);
  } else if (name == "scenario4") {
    cfg.gamma = vec4(0.35, -1.5, 0.0, 0.25);
    cfg.alpha = vec4(0.4, 0.41, 0.15, 0.25);
  } else if (name == "scenario5") {
    cfg.gamma = vec4(0.35, -1.5, 0.25, 0.25);
    cfg.alpha = vec4(0.4, 0.41, 0.15, 0.25);
  } else if (name == "binary1" || name == "binary2" || name == "binary3") {
    cfg.mediator_binary = true;
    cfg.theta = vec3(0.0, 2.0, 0.25);
    cfg.gamma = name == "binary1" ? vec4(0.35, -1.5, 0.0, 0.25)
                                  : vec4(0.35, -1.5, 1.5, 0.25);
    cfg.alpha = name == "binary3" ? vec4(0.4, 0.41, 0.6, 0.25)
                                  : vec4(-0.6, 0.41, 0.6, 0.25);
  } else if (name == "overdispersed") {
    cfg.gamma = vec4(0.35, -1.5, 0.25, 0.25);
    cfg.alpha = vec4(-0.6, 0.41, 0.15, 0.25);
    cfg.outcome_family = OutcomeGenFamily::zinb;
    cfg.omega = 2.0;
  } else {
    throw ParseError(
        "unknown preset '" + name +
        "'; valid presets: scenario1 scenario2 scenario3 scenario4 scenario5 "
        "binary1 binary2 binary3 overdispersed");
  }
  return cfg;
}

inline std::vector<std::string> preset_names() {
  return {"scenario1", "scenario2", "scenario3", "scenario4", "scenario5",
          "binary1",   "binary2",   "binary3",   "overdispersed"};
}

namespace detail {

inline void check_config(const ScenarioConfig& cfg) {
  const Eigen::Index p = 3 + (cfg.interaction ? 1 : 0) + 1;
  if (cfg.gamma.size() != p || cfg.alpha.size() != p || cfg.theta.size() != 3)
    throw DimensionError("scenario parameter vectors have inconsistent sizes");
  if (!cfg.mediator_binary && cfg.sigma2 <= 0.0)
    throw DimensionError("scenario sigma2 must be positive");
  if (cfg.outcome_family == OutcomeGenFamily::zinb && cfg.omega <= 0.0)
    throw DimensionError("scenario omega must be positive");
}

inline ResolvedData generate_resolved(const ScenarioConfig& cfg, Rng& rng) {
  check_config(cfg);
  const Eigen::Index n = cfg.n;
  ResolvedData d;
  d.outcome.resize(n);
  d.exposure.resize(n);
  d.mediator.resize(n);
  d.covariates.resize(n, 1);
  const double sd = std::sqrt(cfg.sigma2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = rng.bernoulli(0.5);
    const double c = rng.exponential(2.0);  // chi-square with 2 df
    const double med_lin = cfg.theta[0] + cfg.theta[1] * x + cfg.theta[2] * c;
    const double m = cfg.mediator_binary
                         ? static_cast<double>(rng.bernoulli(expit(med_lin)))
                         : rng.normal(med_lin, sd);
    Eigen::VectorXd z(cfg.gamma.size());
    if (cfg.interaction)
      z << 1.0, x, m, x * m, c;
    else
      z << 1.0, x, m, c;
    const double u = z.dot(cfg.gamma);
    const double mu = std::exp(z.dot(cfg.alpha) + softplus(u));
    const int excess = rng.bernoulli(expit(u));
    long count = 0;
    if (!excess)
      count = cfg.outcome_family == OutcomeGenFamily::zip
                  ? rng.poisson(mu)
                  : rng.neg_binomial(mu, cfg.omega);
    d.outcome[i] = excess ? 0.0 : static_cast<double>(count);
    d.exposure[i] = x;
    d.mediator[i] = m;
    d.covariates(i, 0) = c;
  }
  return d;
}

}  // namespace detail

inline Dataset generate(const ScenarioConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const ResolvedData d = detail::generate_resolved(cfg, rng);
  Dataset ds;
  ds.columns = {"y", "x", "m", "c"};
  ds.values.resize(cfg.n, 4);
  ds.values.col(0) = d.outcome;
  ds.values.col(1) = d.exposure;
  ds.values.col(2) = d.mediator;
  ds.values.col(3) = d.covariates.col(0);
  return ds;
}

// Truth is the same closed form used for estimation, evaluated at the
// configured parameters.
inline EffectSet true_effects(const ScenarioConfig& cfg, MediationSpec spec) {
  detail::check_config(cfg);
  spec.mediator_type =
      cfg.mediator_binary ? MediatorType::binary : MediatorType::continuous;
  spec.interaction = cfg.interaction;
  if (spec.c.size() == 0) {
    spec.c.resize(1);
    spec.c[0] = cfg.c_eval;
  }
  EffectParams par;
  par.theta = cfg.theta;
  par.alpha = cfg.alpha;
  par.sigma2 = cfg.sigma2;
  par.interaction = cfg.interaction;
  return detail::point_effect_set(par, spec);
}

struct SimulationRow {
  OutcomeFamily method = OutcomeFamily::mzip;
  std::string effect;  // "NDE" or "NIE"
  SeMethod se_method = SeMethod::delta_model;
  double median_pct_bias = 0.0;
  double coverage = 0.0;
  double power = 0.0;
  double median_se = 0.0;
  double empirical_se = std::numeric_limits<double>::quiet_NaN();
  int reps_used = 0;
};

struct SimulationReport {
  std::vector<SimulationRow> rows;
  int reps_requested = 0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct RepCell {
  double estimate = 0.0;  // effect scale
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool ok = false;
};

}  // namespace detail

// Monte Carlo study: per replicate, generate data, fit each outcome model,
// compute NDE/NIE with CIs per SE method, then aggregate bias, coverage,
// power, and SE summaries. For ratio-scale effects the percent median bias is
// computed on the log-IRR (estimation) scale; SEs are on the effect scale.
inline SimulationReport run_study(const ScenarioConfig& cfg, int reps,
                                  const std::vector<OutcomeFamily>& methods,
                                  const std::vector<SeMethod>& se_methods,
                                  MediationSpec spec, std::uint64_t seed,
                                  int threads) {
  if (reps < 1) throw DimensionError("run_study: reps must be >= 1");
  detail::check_config(cfg);
  spec.mediator_type =
      cfg.mediator_binary ? MediatorType::binary : MediatorType::continuous;
  spec.interaction = cfg.interaction;
  if (spec.c.size() == 0) {
    spec.c.resize(1);
    spec.c[0] = cfg.c_eval;
  }
  const EffectSet truth_set = true_effects(cfg, spec);
  const double truth[2] = {truth_set.nde.estimate, truth_set.nie.estimate};
  const bool ratio = spec.scale == EffectScale::ratio;
  const double null_value = ratio ? 1.0 : 0.0;

  const std::size_t n_methods = methods.size();
  const std::size_t n_se = se_methods.size();
  std::vector<detail::RepCell> cells(static_cast<std::size_t>(reps) *
                                     n_methods * n_se * 2);
  const auto cell_at = [&](int rep, std::size_t mi, std::size_t si,
                           int eff) -> detail::RepCell& {
    return cells[((static_cast<std::size_t>(rep) * n_methods + mi) * n_se + si) *
                     2 +
                 static_cast<std::size_t>(eff)];
  };

  parallel_for(reps, threads, [&](long rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    const ResolvedData data = detail::generate_resolved(cfg, rng);
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      for (std::size_t si = 0; si < n_se; ++si) {
        MediateOptions opt;
        opt.family = methods[mi];
        opt.seed = seed ^ (static_cast<std::uint64_t>(rep) << 20);
        MediationSpec rep_spec = spec;
        rep_spec.se_method = se_methods[si];
        try {
          const MediationResult res = mediate(data, rep_spec, opt);
          if (!res.outcome_converged || !res.mediator_converged) continue;
          const Effect* eff[2] = {&res.effects.nde, &res.effects.nie};
          for (int e = 0; e < 2; ++e) {
            detail::RepCell& cell = cell_at(static_cast<int>(rep), mi, si, e);
            cell.estimate = eff[e]->estimate;
            cell.se = eff[e]->se;
            cell.ci_low = eff[e]->ci_low;
            cell.ci_high = eff[e]->ci_high;
            cell.ok = true;
          }
        } catch (const NotConvergedError&) {
        } catch (const DegenerateOutcomeError&) {
        } catch (const NonFiniteError&) {
        } catch (const RankDeficientError&) {
        } catch (const TooManyFailuresError&) {
        }
      }
    }
  });

  SimulationReport report;
  report.reps_requested = reps;
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    for (std::size_t si = 0; si < n_se; ++si) {
      for (int e = 0; e < 2; ++e) {
        std::vector<double> est, se;
        int covered = 0, rejected = 0;
        for (int rep = 0; rep < reps; ++rep) {
          const detail::RepCell& cell = cell_at(rep, mi, si, e);
          if (!cell.ok) continue;
          est.push_back(cell.estimate);
          se.push_back(cell.se);
          if (cell.ci_low <= truth[e] && truth[e] <= cell.ci_high) ++covered;
          if (cell.ci_low > null_value || cell.ci_high < null_value) ++rejected;
        }
        const int used = static_cast<int>(est.size());
        if ((reps - used) * 10 > reps)
          throw TooManyFailuresError(
              "run_study: more than 10% of replicates failed for a method");
        SimulationRow row;
        row.method = methods[mi];
        row.effect = e == 0 ? "NDE" : "NIE";
        row.se_method = se_methods[si];
        row.reps_used = used;
        std::vector<double> canonical = est;
        double canonical_truth = truth[e];
        if (ratio) {
          for (double& v : canonical) v = std::log(v);
          canonical_truth = std::log(canonical_truth);
        }
        row.median_pct_bias =
            100.0 * (detail::median_of(canonical) - canonical_truth) /
            canonical_truth;
        row.coverage = static_cast<double>(covered) / used;
        row.power = static_cast<double>(rejected) / used;
        row.median_se = detail::median_of(se);
        if (used > 1) {
          double mean = 0.0;
          for (const double v : est) mean += v;
          mean /= used;
          double ss = 0.0;
          for (const double v : est) ss += (v - mean) * (v - mean);
          row.empirical_se = std::sqrt(ss / (used - 1));
        }
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

}  // namespace mzipmed

#endif
