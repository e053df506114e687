#ifndef MZIPMED_MEDIATE_HPP
#define MZIPMED_MEDIATE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "dataset.hpp"
#include "effects.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace mzipmed {

enum class OutcomeFamily { mzip, poisson };

struct MediateOptions {
  OutcomeFamily family = OutcomeFamily::mzip;
  OptimSettings optim;
  int bootstrap_reps = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct MediationResult {
  EffectSet effects;
  SeMethod se_method = SeMethod::delta_model;
  Eigen::Index n = 0;
  Eigen::Index dropped_rows = 0;
  // fit diagnostics
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;  // empty for a Poisson outcome model
  Eigen::VectorXd theta;
  double sigma2 = std::numeric_limits<double>::quiet_NaN();
  double outcome_loglik = 0.0;
  bool outcome_converged = false;
  bool mediator_converged = false;
  int bootstrap_reps = 0;
  int bootstrap_failures = 0;
};

inline Eigen::MatrixXd outcome_design(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& m,
                                      const Eigen::MatrixXd& c,
                                      bool interaction) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd z(n, 3 + (interaction ? 1 : 0) + c.cols());
  z.col(0).setOnes();
  z.col(1) = x;
  z.col(2) = m;
  if (interaction) z.col(3) = x.cwiseProduct(m);
  z.rightCols(c.cols()) = c;
  return z;
}

inline Eigen::MatrixXd mediator_design(const Eigen::VectorXd& x,
                                       const Eigen::MatrixXd& c) {
  Eigen::MatrixXd z(x.size(), 2 + c.cols());
  z.col(0).setOnes();
  z.col(1) = x;
  z.rightCols(c.cols()) = c;
  return z;
}

namespace detail {

struct FittedModels {
  OutcomeEstimate outcome;
  LinearFit med_linear;
  GlmFit med_logistic;
  // extra diagnostics
  Eigen::VectorXd gamma;
  double outcome_loglik = 0.0;
  bool mediator_converged = false;
};

inline FittedModels fit_models(const ResolvedData& data,
                               const MediationSpec& spec,
                               const MediateOptions& opt) {
  FittedModels fm;
  const Eigen::MatrixXd zy =
      outcome_design(data.exposure, data.mediator, data.covariates,
                     spec.interaction);
  const Eigen::MatrixXd zm = mediator_design(data.exposure, data.covariates);
  if (opt.family == OutcomeFamily::mzip) {
    const MzipFit fit = mzip_fit(zy, data.outcome, opt.optim);
    fm.outcome = outcome_estimate(fit);
    fm.gamma = fit.gamma;
    fm.outcome_loglik = fit.loglik;
  } else {
    const GlmFit fit = fit_poisson(zy, data.outcome, opt.optim);
    fm.outcome = outcome_estimate(fit);
    fm.outcome_loglik = fit.loglik;
  }
  if (spec.mediator_type == MediatorType::continuous) {
    fm.med_linear = fit_linear(zm, data.mediator);
    fm.mediator_converged = true;
  } else {
    fm.med_logistic = fit_logistic(zm, data.mediator, opt.optim);
    fm.mediator_converged = fm.med_logistic.converged;
  }
  return fm;
}

inline EffectSet point_effects(const FittedModels& fm,
                               const MediationSpec& spec) {
  if (spec.mediator_type == MediatorType::continuous)
    return effects_continuous(fm.outcome, fm.med_linear, spec);
  return effects_binary(fm.outcome, fm.med_logistic, spec);
}

inline double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = lo + 1 < v.size() ? lo + 1 : lo;
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

inline void fill_default_c(MediationSpec& spec, const Eigen::MatrixXd& covariates) {
  if (spec.c.size() == 0 && covariates.cols() > 0)
    spec.c = covariates.colwise().mean().transpose();
}

// Nonparametric bootstrap: resample rows jointly, refit both models, recompute
// point effects. Percentile CIs, SD-based SEs; non-converged replicates are
// dropped and counted.
inline MediationResult bootstrap_effects(const ResolvedData& data,
                                         MediationSpec spec,
                                         const MediateOptions& opt) {
  if (opt.bootstrap_reps < 2)
    throw DimensionError("bootstrap_effects: need at least 2 replicates");
  fill_default_c(spec, data.covariates);
  const Eigen::Index n = data.outcome.size();

  detail::FittedModels full = detail::fit_models(data, spec, opt);
  MediationResult res;
  res.effects = detail::point_effects(full, spec);
  res.se_method = SeMethod::bootstrap;
  res.n = n;
  res.dropped_rows = data.dropped_rows;

  const int b = opt.bootstrap_reps;
  std::vector<std::array<double, 4>> draws(static_cast<std::size_t>(b));
  std::vector<char> ok(static_cast<std::size_t>(b), 0);
  parallel_for(b, opt.threads, [&](long r) {
    Rng rng(opt.seed, static_cast<std::uint64_t>(r));
    ResolvedData sample;
    sample.outcome.resize(n);
    sample.exposure.resize(n);
    sample.mediator.resize(n);
    sample.covariates.resize(n, data.covariates.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j =
          static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
      const Eigen::Index jj = j < n ? j : n - 1;
      sample.outcome[i] = data.outcome[jj];
      sample.exposure[i] = data.exposure[jj];
      sample.mediator[i] = data.mediator[jj];
      sample.covariates.row(i) = data.covariates.row(jj);
    }
    try {
      const detail::FittedModels fm = detail::fit_models(sample, spec, opt);
      const EffectSet es = detail::point_effects(fm, spec);
      draws[static_cast<std::size_t>(r)] = {es.nde.estimate, es.nie.estimate,
                                            es.cde.estimate, es.te.estimate};
      ok[static_cast<std::size_t>(r)] = 1;
    } catch (const NotConvergedError&) {
    } catch (const DegenerateOutcomeError&) {
    } catch (const NonFiniteError&) {
    } catch (const RankDeficientError&) {
    }
  });

  int failures = 0;
  std::vector<double> kept[4];
  for (int r = 0; r < b; ++r) {
    if (!ok[static_cast<std::size_t>(r)]) {
      ++failures;
      continue;
    }
    for (int e = 0; e < 4; ++e)
      kept[e].push_back(draws[static_cast<std::size_t>(r)][static_cast<std::size_t>(e)]);
  }
  res.bootstrap_reps = b;
  res.bootstrap_failures = failures;
  if (failures * 10 > b)
    throw TooManyFailuresError(
        "bootstrap_effects: " + std::to_string(failures) + " of " +
        std::to_string(b) + " replicates failed to converge");

  Effect* slots[4] = {&res.effects.nde, &res.effects.nie, &res.effects.cde,
                      &res.effects.te};
  const double lo_p = 0.5 * (1.0 - spec.level);
  for (int e = 0; e < 4; ++e) {
    const std::vector<double>& v = kept[e];
    double mean = 0.0;
    for (const double d : v) mean += d;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double d : v) ss += (d - mean) * (d - mean);
    slots[e]->se = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
    slots[e]->ci_low = detail::percentile(v, lo_p);
    slots[e]->ci_high = detail::percentile(v, 1.0 - lo_p);
  }

  res.alpha = full.outcome.alpha;
  res.gamma = full.gamma;
  res.theta = spec.mediator_type == MediatorType::continuous
                  ? full.med_linear.theta
                  : full.med_logistic.coefficients;
  if (spec.mediator_type == MediatorType::continuous)
    res.sigma2 = full.med_linear.sigma2;
  res.outcome_loglik = full.outcome_loglik;
  res.outcome_converged = full.outcome.converged;
  res.mediator_converged = full.mediator_converged;
  return res;
}

// Orchestrator: fit mediator and outcome models, compute effects, attach
// uncertainty per spec.se_method. Ratio-scale SEs are reported on the effect
// (IRR) scale; their CIs come from the log scale.
inline MediationResult mediate(const ResolvedData& data, MediationSpec spec,
                               const MediateOptions& opt = {}) {
  fill_default_c(spec, data.covariates);
  if (spec.se_method == SeMethod::bootstrap)
    return bootstrap_effects(data, spec, opt);

  const detail::FittedModels fm = detail::fit_models(data, spec, opt);
  MediationResult res;
  res.effects = detail::point_effects(fm, spec);
  res.se_method = spec.se_method;
  res.n = data.outcome.size();
  res.dropped_rows = data.dropped_rows;

  const Eigen::Vector4d se =
      spec.mediator_type == MediatorType::continuous
          ? delta_se_continuous(fm.outcome, fm.med_linear, spec)
          : delta_se_binary(fm.outcome, fm.med_logistic, spec);
  Effect* slots[4] = {&res.effects.nde, &res.effects.nie, &res.effects.cde,
                      &res.effects.te};
  for (int e = 0; e < 4; ++e) {
    const auto [lo, hi] =
        confidence_interval(slots[e]->estimate, se[e], spec.scale, spec.level);
    slots[e]->ci_low = lo;
    slots[e]->ci_high = hi;
    slots[e]->se = spec.scale == EffectScale::ratio
                       ? slots[e]->estimate * se[e]
                       : se[e];
  }

  res.alpha = fm.outcome.alpha;
  res.gamma = fm.gamma;
  res.theta = spec.mediator_type == MediatorType::continuous
                  ? fm.med_linear.theta
                  : fm.med_logistic.coefficients;
  if (spec.mediator_type == MediatorType::continuous)
    res.sigma2 = fm.med_linear.sigma2;
  res.outcome_loglik = fm.outcome_loglik;
  res.outcome_converged = fm.outcome.converged;
  res.mediator_converged = fm.mediator_converged;
  return res;
}

}  // namespace mzipmed

#endif
