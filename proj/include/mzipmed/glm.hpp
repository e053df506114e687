#ifndef MZIPMED_GLM_HPP
#define MZIPMED_GLM_HPP

#include <Eigen/Dense>
#include <cmath>

#include "errors.hpp"
#include "optimize.hpp"

namespace mzipmed {

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double expit(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

struct LinearFit {
  Eigen::VectorXd theta;
  double sigma2 = 0.0;
  double sigma2_var = 0.0;
  Eigen::MatrixXd cov_theta;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
};

enum class GlmFamily { logistic, poisson };

struct GlmFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd cov_model;
  Eigen::MatrixXd cov_robust;
  double loglik = 0.0;
  bool converged = false;
  GlmFamily family = GlmFamily::poisson;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
};

namespace detail {

inline void check_design(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& response) {
  if (design.rows() != response.size())
    throw DimensionError("design rows must match response length");
  if (design.rows() <= design.cols())
    throw DimensionError("need more observations than parameters");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols())
    throw RankDeficientError("design matrix is rank deficient");
}

}  // namespace detail

inline Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& per_obs_scores,
                                           const Eigen::MatrixXd& hessian) {
  const Eigen::MatrixXd a = -hessian;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw SingularMatrixError("sandwich_covariance: singular Hessian");
  const Eigen::MatrixXd a_inv = lu.inverse();
  const Eigen::MatrixXd b = per_obs_scores.transpose() * per_obs_scores;
  const Eigen::MatrixXd v = a_inv * b * a_inv;
  return 0.5 * (v + v.transpose());
}

inline LinearFit fit_linear(const Eigen::MatrixXd& design,
                            const Eigen::VectorXd& response) {
  detail::check_design(design, response);
  LinearFit fit;
  fit.n = design.rows();
  fit.p = design.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  fit.theta = qr.solve(response);
  const Eigen::VectorXd resid = response - design * fit.theta;
  const double dof = static_cast<double>(fit.n - fit.p);
  fit.sigma2 = resid.squaredNorm() / dof;
  fit.sigma2_var = 2.0 * fit.sigma2 * fit.sigma2 / dof;
  const Eigen::MatrixXd xtx_inv =
      (design.transpose() * design).ldlt().solve(
          Eigen::MatrixXd::Identity(fit.p, fit.p));
  fit.cov_theta = 0.5 * fit.sigma2 * (xtx_inv + xtx_inv.transpose());
  return fit;
}

namespace detail {

// Shared Newton loop for the two canonical-link GLM families. Declares
// non-convergence if any coefficient leaves [-30, 30] (separation guard).
inline GlmFit fit_glm(const Eigen::MatrixXd& design,
                      const Eigen::VectorXd& response, GlmFamily family,
                      const OptimSettings& settings) {
  check_design(design, response);
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();

  const auto mean_fn = [family](const Eigen::ArrayXd& eta) -> Eigen::ArrayXd {
    if (family == GlmFamily::logistic)
      return eta.unaryExpr([](double e) { return expit(e); });
    return eta.min(700.0).exp();
  };
  const auto loglik_fn = [&](const Eigen::VectorXd& b) -> double {
    const Eigen::ArrayXd eta = (design * b).array();
    if (family == GlmFamily::logistic)
      return (response.array() * eta -
              eta.unaryExpr([](double e) { return softplus(e); }))
          .sum();
    double lg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) lg += std::lgamma(response[i] + 1.0);
    return (response.array() * eta - eta.min(700.0).exp()).sum() - lg;
  };

  GlmFit fit;
  fit.family = family;
  fit.n = n;
  fit.p = p;
  fit.coefficients = Eigen::VectorXd::Zero(p);

  double ll = loglik_fn(fit.coefficients);
  bool bounded = true;
  int iter = 0;
  Eigen::ArrayXd eta = (design * fit.coefficients).array();
  Eigen::ArrayXd mu = mean_fn(eta);
  Eigen::VectorXd g = design.transpose() * (response.array() - mu).matrix();

  const auto gtol = [&] { return settings.tol_grad * (1.0 + std::abs(ll)); };
  for (iter = 1; iter <= settings.max_iterations; ++iter) {
    if (g.cwiseAbs().maxCoeff() <= gtol()) {
      fit.converged = true;
      break;
    }
    const Eigen::ArrayXd w = family == GlmFamily::logistic
                                 ? Eigen::ArrayXd((mu * (1.0 - mu)).max(1e-12))
                                 : Eigen::ArrayXd(mu.max(1e-12));
    const Eigen::MatrixXd xtwx =
        design.transpose() * w.matrix().asDiagonal() * design;
    Eigen::VectorXd dir = xtwx.ldlt().solve(g);
    if (!dir.allFinite() || dir.dot(g) <= 0.0) dir = g;

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double new_ll = ll;
    for (int half = 0; half <= settings.step_halving_max; ++half) {
      candidate = fit.coefficients + step * dir;
      new_ll = loglik_fn(candidate);
      if (std::isfinite(new_ll) && new_ll >= ll) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    fit.coefficients = candidate;
    ll = new_ll;
    if (fit.coefficients.cwiseAbs().maxCoeff() > 30.0) {
      bounded = false;  // separation: estimates are running away
      break;
    }
    eta = (design * fit.coefficients).array();
    mu = mean_fn(eta);
    g = design.transpose() * (response.array() - mu).matrix();
  }
  if (!fit.converged && g.cwiseAbs().maxCoeff() <= gtol() && bounded)
    fit.converged = true;
  if (!bounded) fit.converged = false;

  fit.loglik = ll;
  eta = (design * fit.coefficients).array();
  mu = mean_fn(eta);
  const Eigen::ArrayXd w_final = family == GlmFamily::logistic
                                     ? Eigen::ArrayXd(mu * (1.0 - mu))
                                     : mu;
  const Eigen::MatrixXd info =
      design.transpose() * w_final.matrix().asDiagonal() * design;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse();
    fit.cov_model = 0.5 * (cov + cov.transpose());
    const Eigen::MatrixXd scores =
        design.array().colwise() * (response.array() - mu);
    fit.cov_robust = sandwich_covariance(scores, -info);
  } else {
    fit.cov_model = Eigen::MatrixXd::Constant(
        p, p, std::numeric_limits<double>::quiet_NaN());
    fit.cov_robust = fit.cov_model;
    fit.converged = false;
  }
  return fit;
}

}  // namespace detail

inline GlmFit fit_logistic(const Eigen::MatrixXd& design,
                           const Eigen::VectorXd& response,
                           const OptimSettings& settings = {}) {
  for (Eigen::Index i = 0; i < response.size(); ++i)
    if (response[i] != 0.0 && response[i] != 1.0)
      throw DimensionError("fit_logistic: response must be 0/1");
  return detail::fit_glm(design, response, GlmFamily::logistic, settings);
}

inline GlmFit fit_poisson(const Eigen::MatrixXd& design,
                          const Eigen::VectorXd& response,
                          const OptimSettings& settings = {}) {
  for (Eigen::Index i = 0; i < response.size(); ++i)
    if (response[i] < 0.0 || response[i] != std::floor(response[i]))
      throw DimensionError("fit_poisson: response must be nonnegative integers");
  GlmFit fit = detail::fit_glm(design, response, GlmFamily::poisson, settings);
  if (response.maxCoeff() == 0.0) fit.converged = false;  // intercept -> -inf
  return fit;
}

}  // namespace mzipmed

#endif
