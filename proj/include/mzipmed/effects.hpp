#ifndef MZIPMED_EFFECTS_HPP
#define MZIPMED_EFFECTS_HPP

#include <Eigen/Dense>
#include <cmath>

#include "errors.hpp"
#include "glm.hpp"
#include "mzip.hpp"

namespace mzipmed {

enum class MediatorType { continuous, binary };
enum class EffectScale { ratio, difference };
enum class SeMethod { delta_model, delta_robust, bootstrap };

struct MediationSpec {
  double x = 1.0;
  double x_star = 0.0;
  Eigen::VectorXd c;  // covariate evaluation vector
  double m_cde = 0.0;
  MediatorType mediator_type = MediatorType::continuous;
  EffectScale scale = EffectScale::ratio;
  bool interaction = false;
  SeMethod se_method = SeMethod::delta_model;
  double level = 0.95;
};

struct Effect {
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct EffectSet {
  Effect nde, nie, cde, te;
  double pm = 0.0;
  EffectScale scale = EffectScale::ratio;
};

// Parameters the effect formulas depend on: mediator model coefficients
// (intercept, exposure, covariates), outcome overall-mean coefficients
// (intercept, exposure, mediator, optional interaction, covariates), and the
// linear-mediator residual variance.
struct EffectParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd alpha;
  double sigma2 = 0.0;
  bool interaction = false;
};

// Outcome-model view shared by MZIP and Poisson fits: the overall-mean
// coefficients and their covariance (model-based and robust).
struct OutcomeEstimate {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd cov_alpha;
  Eigen::MatrixXd cov_alpha_robust;
  bool converged = false;
};

inline OutcomeEstimate outcome_estimate(const MzipFit& fit) {
  OutcomeEstimate e;
  e.alpha = fit.alpha;
  e.cov_alpha = fit.cov_joint.bottomRightCorner(fit.p, fit.p);
  e.cov_alpha_robust = fit.cov_joint_robust.bottomRightCorner(fit.p, fit.p);
  e.converged = fit.converged;
  return e;
}

inline OutcomeEstimate outcome_estimate(const GlmFit& fit) {
  if (fit.family != GlmFamily::poisson)
    throw SpecMismatchError("outcome model must be MZIP or Poisson");
  return OutcomeEstimate{fit.coefficients, fit.cov_model, fit.cov_robust,
                         fit.converged};
}

namespace detail {

struct AlphaView {
  double a0, a1, a2, a3;
  Eigen::VectorXd a4;
};

inline AlphaView alpha_view(const EffectParams& par) {
  const Eigen::Index k = par.theta.size() - 2;
  const Eigen::Index want = 3 + (par.interaction ? 1 : 0) + k;
  if (par.alpha.size() != want || k < 0)
    throw SpecMismatchError("effect parameters have inconsistent lengths");
  AlphaView v;
  v.a0 = par.alpha[0];
  v.a1 = par.alpha[1];
  v.a2 = par.alpha[2];
  v.a3 = par.interaction ? par.alpha[3] : 0.0;
  v.a4 = par.alpha.tail(k);
  return v;
}

inline double mediator_mean(const EffectParams& par, const MediationSpec& spec,
                            double at_x) {
  return par.theta[0] + par.theta[1] * at_x +
         par.theta.tail(par.theta.size() - 2).dot(spec.c);
}

// Canonical effect values used for both point estimates and delta
// propagation: per-unit log IRRs for the continuous ratio case, full log IRRs
// for the binary ratio case, rate differences otherwise. Order: NDE, NIE,
// CDE, TE.
inline Eigen::Vector4d canonical_effects(const EffectParams& par,
                                         const MediationSpec& spec) {
  if (spec.c.size() != par.theta.size() - 2)
    throw SpecMismatchError("spec.c length must match fitted covariate count");
  const AlphaView a = alpha_view(par);
  const double x = spec.x, xs = spec.x_star;
  Eigen::Vector4d out;
  if (spec.mediator_type == MediatorType::continuous) {
    const double mm_star = mediator_mean(par, spec, xs);
    if (spec.scale == EffectScale::ratio) {
      const double nde = a.a1 + a.a3 * (mm_star + a.a2 * par.sigma2) +
                         0.5 * a.a3 * a.a3 * par.sigma2 * (x + xs);
      const double nie = (a.a2 + a.a3 * x) * par.theta[1];
      const double cde = par.interaction ? a.a1 + a.a3 * spec.m_cde : nde;
      out << nde, nie, cde, nde + nie;
      return out;
    }
    // difference scale: exponential of the counterfactual mean with the
    // mediator integrated out at exposure level m_at
    const auto big_e = [&](double b, double m_at) {
      const double s = a.a2 + a.a3 * b;
      return std::exp(a.a0 + a.a1 * b + s * mediator_mean(par, spec, m_at) +
                      0.5 * par.sigma2 * s * s + a.a4.dot(spec.c));
    };
    const double nde = big_e(x, xs) - big_e(xs, xs);
    const double nie = big_e(x, x) - big_e(x, xs);
    double cde;
    if (par.interaction) {
      const double base = std::exp(a.a0 + a.a2 * spec.m_cde + a.a4.dot(spec.c));
      cde = base * (std::exp((a.a1 + a.a3 * spec.m_cde) * x) -
                    std::exp((a.a1 + a.a3 * spec.m_cde) * xs));
    } else {
      cde = nde;
    }
    out << nde, nie, cde, nde + nie;
    return out;
  }
  // binary mediator
  const auto w = [&](double b) { return mediator_mean(par, spec, b); };
  const auto s = [&](double b) { return a.a2 + a.a3 * b; };
  if (spec.scale == EffectScale::ratio) {
    // group the softplus pairs so terms that cancel do so exactly
    const double nde = a.a1 * (x - xs) +
                       (softplus(s(x) + w(xs)) - softplus(s(xs) + w(xs)));
    const double nie = (softplus(s(x) + w(x)) - softplus(w(x))) -
                       (softplus(s(x) + w(xs)) - softplus(w(xs)));
    const double cde =
        par.interaction ? (a.a1 + a.a3 * spec.m_cde) * (x - xs) : nde;
    out << nde, nie, cde, nde + nie;
    return out;
  }
  // bracket = E(e^{(a2+a3 b) M}) for M | mediator exposure m_at
  const auto big_g = [&](double b, double m_at) {
    return std::exp(a.a0 + a.a1 * b + a.a4.dot(spec.c)) *
           std::exp(softplus(w(m_at) + s(b)) - softplus(w(m_at)));
  };
  const double nde = big_g(x, xs) - big_g(xs, xs);
  const double nie = big_g(x, x) - big_g(x, xs);
  double cde;
  if (par.interaction) {
    const double base = std::exp(a.a0 + a.a2 * spec.m_cde + a.a4.dot(spec.c));
    cde = base * (std::exp((a.a1 + a.a3 * spec.m_cde) * x) -
                  std::exp((a.a1 + a.a3 * spec.m_cde) * xs));
  } else {
    cde = nde;
  }
  out << nde, nie, cde, nde + nie;
  return out;
}

inline bool needs_sigma2(const MediationSpec& spec) {
  return spec.mediator_type == MediatorType::continuous &&
         (spec.scale == EffectScale::difference || spec.interaction);
}

}  // namespace mzipmed::detail

// Packed parameter vector for delta propagation, ordered
// (theta..., alpha..., sigma2 when the effect formulas use it).
inline Eigen::VectorXd pack_effect_params(const EffectParams& par,
                                          const MediationSpec& spec) {
  const Eigen::Index nt = par.theta.size();
  const Eigen::Index na = par.alpha.size();
  const bool with_s2 = detail::needs_sigma2(spec);
  Eigen::VectorXd packed(nt + na + (with_s2 ? 1 : 0));
  packed.head(nt) = par.theta;
  packed.segment(nt, na) = par.alpha;
  if (with_s2) packed[nt + na] = par.sigma2;
  return packed;
}

inline EffectParams unpack_effect_params(const Eigen::VectorXd& packed,
                                         Eigen::Index n_theta,
                                         const MediationSpec& spec) {
  EffectParams par;
  par.interaction = spec.interaction;
  const bool with_s2 = detail::needs_sigma2(spec);
  const Eigen::Index na = packed.size() - n_theta - (with_s2 ? 1 : 0);
  par.theta = packed.head(n_theta);
  par.alpha = packed.segment(n_theta, na);
  par.sigma2 = with_s2 ? packed[packed.size() - 1] : 0.0;
  return par;
}

// Canonical effect values as a function of the packed vector (used by the
// finite-difference Jacobian oracle).
inline Eigen::Vector4d effect_values_packed(const Eigen::VectorXd& packed,
                                            Eigen::Index n_theta,
                                            const MediationSpec& spec,
                                            double sigma2_fixed = 0.0) {
  EffectParams par = unpack_effect_params(packed, n_theta, spec);
  if (!detail::needs_sigma2(spec)) par.sigma2 = sigma2_fixed;
  return detail::canonical_effects(par, spec);
}

// Analytic Jacobian of the canonical effects with respect to the packed
// parameter vector. Rows: NDE, NIE, CDE, TE.
inline Eigen::MatrixXd effect_jacobian(const EffectParams& par,
                                       const MediationSpec& spec) {
  const detail::AlphaView a = detail::alpha_view(par);
  const Eigen::Index k = par.theta.size() - 2;
  const Eigen::Index nt = 2 + k;
  const Eigen::Index na = par.alpha.size();
  const bool with_s2 = detail::needs_sigma2(spec);
  const Eigen::Index np = nt + na + (with_s2 ? 1 : 0);
  const double x = spec.x, xs = spec.x_star;
  const Eigen::Index ia0 = nt, ia1 = nt + 1, ia2 = nt + 2;
  const Eigen::Index ia3 = par.interaction ? nt + 3 : -1;
  const Eigen::Index ia4 = nt + 3 + (par.interaction ? 1 : 0);
  const Eigen::Index is2 = with_s2 ? np - 1 : -1;

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4, np);
  auto nde = j.row(0), nie = j.row(1), cde = j.row(2);

  if (spec.mediator_type == MediatorType::continuous) {
    const double mm_star = detail::mediator_mean(par, spec, xs);
    if (spec.scale == EffectScale::ratio) {
      // per-unit log IRRs
      nde[0] = a.a3;
      nde[1] = a.a3 * xs;
      nde.segment(2, k) = a.a3 * spec.c.transpose();
      nde[ia1] = 1.0;
      nde[ia2] = a.a3 * par.sigma2;
      if (ia3 >= 0)
        nde[ia3] = mm_star + a.a2 * par.sigma2 +
                   a.a3 * par.sigma2 * (x + xs);
      if (is2 >= 0) nde[is2] = a.a2 * a.a3 + 0.5 * a.a3 * a.a3 * (x + xs);

      nie[1] = a.a2 + a.a3 * x;
      nie[ia2] = par.theta[1];
      if (ia3 >= 0) nie[ia3] = par.theta[1] * x;

      if (par.interaction) {
        cde[ia1] = 1.0;
        cde[ia3] = spec.m_cde;
      } else {
        cde = nde;
      }
      j.row(3) = j.row(0) + j.row(1);
      return j;
    }
    // difference scale
    const auto big_e = [&](double b, double m_at) {
      const double s = a.a2 + a.a3 * b;
      return std::exp(a.a0 + a.a1 * b +
                      s * detail::mediator_mean(par, spec, m_at) +
                      0.5 * par.sigma2 * s * s + a.a4.dot(spec.c));
    };
    const double sx = a.a2 + a.a3 * x, ss = a.a2 + a.a3 * xs;
    {
      const double ex = big_e(x, xs), es = big_e(xs, xs);
      const double d1 = sx * ex - ss * es;
      nde[0] = d1;
      nde[1] = xs * d1;
      nde.segment(2, k) = d1 * spec.c.transpose();
      nde[ia0] = ex - es;
      nde[ia1] = x * ex - xs * es;
      nde[ia2] = (mm_star + par.sigma2 * sx) * ex -
                 (mm_star + par.sigma2 * ss) * es;
      if (ia3 >= 0)
        nde[ia3] = x * (mm_star + par.sigma2 * sx) * ex -
                   xs * (mm_star + par.sigma2 * ss) * es;
      nde.segment(ia4, k) = (ex - es) * spec.c.transpose();
      nde[is2] = 0.5 * sx * sx * ex - 0.5 * ss * ss * es;
    }
    {
      const double mm = detail::mediator_mean(par, spec, x);
      const double fx = big_e(x, x), fs = big_e(x, xs);
      const double rd_ie = fx - fs;
      const double i1 = sx * rd_ie;
      nie[0] = i1;
      nie[1] = sx * (x * fx - xs * fs);
      nie.segment(2, k) = i1 * spec.c.transpose();
      nie[ia0] = rd_ie;
      nie[ia1] = x * rd_ie;
      nie[ia2] = (mm + par.sigma2 * sx) * fx - (mm_star + par.sigma2 * sx) * fs;
      if (ia3 >= 0) nie[ia3] = x * nie[ia2];
      nie.segment(ia4, k) = rd_ie * spec.c.transpose();
      nie[is2] = 0.5 * sx * sx * rd_ie;
    }
    if (par.interaction) {
      const double slope = a.a1 + a.a3 * spec.m_cde;
      const double base = std::exp(a.a0 + a.a2 * spec.m_cde + a.a4.dot(spec.c));
      const double vx = base * std::exp(slope * x);
      const double vs = base * std::exp(slope * xs);
      cde[ia0] = vx - vs;
      cde[ia1] = x * vx - xs * vs;
      cde[ia2] = spec.m_cde * (vx - vs);
      cde[ia3] = spec.m_cde * (x * vx - xs * vs);
      cde.segment(ia4, k) = (vx - vs) * spec.c.transpose();
    } else {
      cde = nde;
    }
    j.row(3) = j.row(0) + j.row(1);
    return j;
  }

  // binary mediator
  const auto w = [&](double b) { return detail::mediator_mean(par, spec, b); };
  const auto s = [&](double b) { return a.a2 + a.a3 * b; };
  if (spec.scale == EffectScale::ratio) {
    const double q = expit(s(x) + w(xs));
    const double b_ = expit(s(xs) + w(xs));
    nde[0] = q - b_;
    nde[1] = xs * (q - b_);
    nde.segment(2, k) = (q - b_) * spec.c.transpose();
    nde[ia1] = x - xs;
    nde[ia2] = q - b_;
    if (ia3 >= 0) nde[ia3] = x * q - xs * b_;

    const double r = expit(s(x) + w(x));
    const double f = expit(s(x) + w(xs));
    const double kk = expit(w(x));
    const double d_ = expit(w(xs));
    nie[0] = d_ + r - kk - f;
    nie[1] = xs * (d_ - f) + x * (r - kk);
    nie.segment(2, k) = (d_ + r - kk - f) * spec.c.transpose();
    nie[ia2] = r - f;
    if (ia3 >= 0) nie[ia3] = x * (r - f);

    if (par.interaction) {
      cde[ia1] = x - xs;
      cde[ia3] = spec.m_cde * (x - xs);
    } else {
      cde = nde;
    }
    j.row(3) = j.row(0) + j.row(1);
    return j;
  }
  // binary, difference scale
  const auto big_g = [&](double b, double m_at) {
    return std::exp(a.a0 + a.a1 * b + a.a4.dot(spec.c)) *
           std::exp(softplus(w(m_at) + s(b)) - softplus(w(m_at)));
  };
  {
    const double gx = big_g(x, xs), gs = big_g(xs, xs);
    const double d_ = expit(w(xs));
    const double qx = expit(w(xs) + s(x));
    const double qs = expit(w(xs) + s(xs));
    const double d1 = gx * (qx - d_) - gs * (qs - d_);
    nde[0] = d1;
    nde[1] = xs * d1;
    nde.segment(2, k) = d1 * spec.c.transpose();
    nde[ia0] = gx - gs;
    nde[ia1] = x * gx - xs * gs;
    nde[ia2] = gx * qx - gs * qs;
    if (ia3 >= 0) nde[ia3] = x * gx * qx - xs * gs * qs;
    nde.segment(ia4, k) = (gx - gs) * spec.c.transpose();
  }
  {
    const double hx = big_g(x, x), hs = big_g(x, xs);
    const double r = expit(w(x) + s(x));
    const double f = expit(w(xs) + s(x));
    const double kk = expit(w(x));
    const double d_ = expit(w(xs));
    const double rd_ie = hx - hs;
    const double i1 = hx * (r - kk) - hs * (f - d_);
    nie[0] = i1;
    nie[1] = x * hx * (r - kk) - xs * hs * (f - d_);
    nie.segment(2, k) = i1 * spec.c.transpose();
    nie[ia0] = rd_ie;
    nie[ia1] = x * rd_ie;
    nie[ia2] = hx * r - hs * f;
    if (ia3 >= 0) nie[ia3] = x * (hx * r - hs * f);
    nie.segment(ia4, k) = rd_ie * spec.c.transpose();
  }
  if (par.interaction) {
    const double slope = a.a1 + a.a3 * spec.m_cde;
    const double base = std::exp(a.a0 + a.a2 * spec.m_cde + a.a4.dot(spec.c));
    const double vx = base * std::exp(slope * x);
    const double vs = base * std::exp(slope * xs);
    cde[ia0] = vx - vs;
    cde[ia1] = x * vx - xs * vs;
    cde[ia2] = spec.m_cde * (vx - vs);
    cde[ia3] = spec.m_cde * (x * vx - xs * vs);
    cde.segment(ia4, k) = (vx - vs) * spec.c.transpose();
  } else {
    cde = nde;
  }
  j.row(3) = j.row(0) + j.row(1);
  return j;
}

// Standard-normal quantile (Acklam's rational approximation, refined with one
// Halley step).
inline double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw DimensionError("normal_quantile: probability must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double q, r, z;
  if (prob < p_low) {
    q = std::sqrt(-2.0 * std::log(prob));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    q = prob - 0.5;
    r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - prob));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-z / std::sqrt(2.0)) - prob;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * z * z);
  return z - u / (1.0 + 0.5 * z * u);
}

inline std::pair<double, double> confidence_interval(double estimate, double se,
                                                     EffectScale scale,
                                                     double level) {
  if (se < 0.0) throw DimensionError("confidence_interval: se must be >= 0");
  const double z = normal_quantile(0.5 * (1.0 + level));
  if (scale == EffectScale::ratio) {
    if (estimate <= 0.0)
      throw NonPositiveEstimateError(
          "confidence_interval: ratio estimate must be positive");
    const double l = std::log(estimate);
    return {std::exp(l - z * se), std::exp(l + z * se)};
  }
  return {estimate - z * se, estimate + z * se};
}

inline double proportion_mediated(const EffectSet& effects) {
  if (effects.scale == EffectScale::ratio) {
    const double denom = effects.nde.estimate * effects.nie.estimate - 1.0;
    if (denom == 0.0)
      throw NullTotalEffectError("proportion_mediated: total effect is null");
    return effects.nde.estimate * (effects.nie.estimate - 1.0) / denom;
  }
  if (effects.te.estimate == 0.0)
    throw NullTotalEffectError("proportion_mediated: total effect is null");
  return effects.nie.estimate / effects.te.estimate;
}

namespace detail {

inline EffectSet point_effect_set(const EffectParams& par,
                                  const MediationSpec& spec) {
  const Eigen::Vector4d vals = canonical_effects(par, spec);
  EffectSet out;
  out.scale = spec.scale;
  const double dx = spec.x - spec.x_star;
  Effect* slots[4] = {&out.nde, &out.nie, &out.cde, &out.te};
  for (int i = 0; i < 4; ++i) {
    double est = vals[i];
    if (spec.scale == EffectScale::ratio) {
      if (spec.mediator_type == MediatorType::continuous) est *= dx;
      est = std::exp(est);
    }
    slots[i]->estimate = est;
    slots[i]->ci_low = est;
    slots[i]->ci_high = est;
  }
  // enforce the decomposition identity exactly
  out.te.estimate = spec.scale == EffectScale::ratio
                        ? out.nde.estimate * out.nie.estimate
                        : out.nde.estimate + out.nie.estimate;
  out.te.ci_low = out.te.ci_high = out.te.estimate;
  try {
    out.pm = proportion_mediated(out);
  } catch (const NullTotalEffectError&) {
    out.pm = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

inline void check_spec(const OutcomeEstimate& out, const EffectParams& par,
                       const MediationSpec& spec) {
  if (!out.converged)
    throw NotConvergedError("outcome model did not converge");
  alpha_view(par);  // validates lengths
  if (spec.c.size() != par.theta.size() - 2)
    throw SpecMismatchError("spec.c length must match fitted covariate count");
}

}  // namespace mzipmed::detail

inline EffectParams effect_params_continuous(const OutcomeEstimate& out,
                                             const LinearFit& med,
                                             const MediationSpec& spec) {
  EffectParams par;
  par.theta = med.theta;
  par.alpha = out.alpha;
  par.sigma2 = med.sigma2;
  par.interaction = spec.interaction;
  return par;
}

inline EffectParams effect_params_binary(const OutcomeEstimate& out,
                                         const GlmFit& med,
                                         const MediationSpec& spec) {
  if (med.family != GlmFamily::logistic)
    throw SpecMismatchError("binary mediator requires a logistic mediator fit");
  if (!med.converged)
    throw NotConvergedError("mediator model did not converge");
  EffectParams par;
  par.theta = med.coefficients;
  par.alpha = out.alpha;
  par.sigma2 = 0.0;
  par.interaction = spec.interaction;
  return par;
}

inline EffectSet effects_continuous(const OutcomeEstimate& out,
                                    const LinearFit& med,
                                    const MediationSpec& spec) {
  if (spec.mediator_type != MediatorType::continuous)
    throw SpecMismatchError("effects_continuous requires a continuous mediator");
  const EffectParams par = effect_params_continuous(out, med, spec);
  detail::check_spec(out, par, spec);
  return detail::point_effect_set(par, spec);
}

inline EffectSet effects_binary(const OutcomeEstimate& out, const GlmFit& med,
                                const MediationSpec& spec) {
  if (spec.mediator_type != MediatorType::binary)
    throw SpecMismatchError("effects_binary requires a binary mediator");
  const EffectParams par = effect_params_binary(out, med, spec);
  detail::check_spec(out, par, spec);
  return detail::point_effect_set(par, spec);
}

namespace detail {

// Block-diagonal parameter covariance matching the packed ordering.
inline Eigen::MatrixXd packed_covariance(const Eigen::MatrixXd& cov_theta,
                                         const Eigen::MatrixXd& cov_alpha,
                                         double sigma2_var, bool with_s2) {
  const Eigen::Index nt = cov_theta.rows();
  const Eigen::Index na = cov_alpha.rows();
  const Eigen::Index np = nt + na + (with_s2 ? 1 : 0);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(np, np);
  sigma.topLeftCorner(nt, nt) = cov_theta;
  sigma.block(nt, nt, na, na) = cov_alpha;
  if (with_s2) sigma(np - 1, np - 1) = sigma2_var;
  return sigma;
}

inline Eigen::Vector4d delta_se(const EffectParams& par,
                                const MediationSpec& spec,
                                const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd j = effect_jacobian(par, spec);
  Eigen::Vector4d se;
  for (int i = 0; i < 4; ++i) {
    const double v = j.row(i) * sigma * j.row(i).transpose();
    se[i] = std::sqrt(v < 0.0 ? 0.0 : v);
  }
  // continuous ratio Jacobian is per unit of exposure contrast
  if (spec.scale == EffectScale::ratio &&
      spec.mediator_type == MediatorType::continuous)
    se *= std::abs(spec.x - spec.x_star);
  return se;
}

}  // namespace mzipmed::detail

// SEs for {NDE, NIE, CDE, TE}: log-IRR scale for ratio effects, additive
// scale for differences.
inline Eigen::Vector4d delta_se_continuous(const OutcomeEstimate& out,
                                           const LinearFit& med,
                                           const MediationSpec& spec) {
  if (spec.mediator_type != MediatorType::continuous)
    throw SpecMismatchError("delta_se_continuous requires a continuous mediator");
  if (spec.se_method == SeMethod::bootstrap)
    throw SpecMismatchError("delta SE requested with bootstrap se_method");
  const EffectParams par = effect_params_continuous(out, med, spec);
  detail::check_spec(out, par, spec);
  const Eigen::MatrixXd& cov_alpha = spec.se_method == SeMethod::delta_robust
                                         ? out.cov_alpha_robust
                                         : out.cov_alpha;
  const Eigen::MatrixXd sigma = detail::packed_covariance(
      med.cov_theta, cov_alpha, med.sigma2_var, detail::needs_sigma2(spec));
  if (!sigma.allFinite())
    throw SingularMatrixError("delta_se_continuous: covariance not available");
  return detail::delta_se(par, spec, sigma);
}

inline Eigen::Vector4d delta_se_binary(const OutcomeEstimate& out,
                                       const GlmFit& med,
                                       const MediationSpec& spec) {
  if (spec.mediator_type != MediatorType::binary)
    throw SpecMismatchError("delta_se_binary requires a binary mediator");
  if (spec.se_method == SeMethod::bootstrap)
    throw SpecMismatchError("delta SE requested with bootstrap se_method");
  const EffectParams par = effect_params_binary(out, med, spec);
  detail::check_spec(out, par, spec);
  const Eigen::MatrixXd& cov_alpha = spec.se_method == SeMethod::delta_robust
                                         ? out.cov_alpha_robust
                                         : out.cov_alpha;
  const Eigen::MatrixXd sigma =
      detail::packed_covariance(med.cov_model, cov_alpha, 0.0, false);
  if (!sigma.allFinite())
    throw SingularMatrixError("delta_se_binary: covariance not available");
  return detail::delta_se(par, spec, sigma);
}

}  // namespace mzipmed

#endif
