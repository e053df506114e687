#ifndef MZIPMED_MZIP_HPP
#define MZIPMED_MZIP_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "glm.hpp"
#include "optimize.hpp"

namespace mzipmed {

struct MzipFit {
  Eigen::VectorXd alpha;   // overall-mean coefficients
  Eigen::VectorXd gamma;   // excess-zero coefficients
  double loglik = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd cov_joint;         // (gamma, alpha) ordering, model based
  Eigen::MatrixXd cov_joint_robust;  // sandwich version
  bool converged = false;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
};

struct MzipMeans {
  Eigen::VectorXd nu;   // overall mean
  Eigen::VectorXd psi;  // excess-zero probability
  Eigen::VectorXd mu;   // latent Poisson mean
};

namespace detail {

inline double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Per-observation pieces shared by loglik, score, and Hessian. u and v are the
// excess-zero and overall-mean linear predictors.
struct MzipObs {
  double ll, s_u, s_v, h_uu, h_uv, h_vv;
};

inline MzipObs mzip_obs(double u, double v, double y) {
  MzipObs o{};
  const double sp = softplus(u);
  const double psi = expit(u);
  const double mu = std::exp(v + sp);
  if (y > 0.0) {
    o.ll = -sp - mu + y * (v + sp) - std::lgamma(y + 1.0);
    o.s_v = y - mu;
    o.s_u = psi * (y - 1.0 - mu);
    o.h_vv = -mu;
    o.h_uv = -mu * psi;
    o.h_uu = psi * (1.0 - psi) * (y - 1.0 - mu) - mu * psi * psi;
  } else {
    // log T with T = e^u + e^{-mu}; fractions a = e^u / T, b = e^{-mu} / T
    const double log_t = logaddexp(u, -mu);
    o.ll = log_t - sp;
    const double a = std::exp(u - log_t);
    const double b = std::exp(-mu - log_t);
    o.s_v = -mu * b;
    o.s_u = a - b * mu * psi - psi;
    o.h_vv = -mu * b + mu * mu * a * b;
    o.h_uv = -psi * b * mu * (1.0 - mu) + (a - b * mu * psi) * b * mu;
    o.h_uu = a - b * mu * psi * (1.0 - mu * psi) -
             (a - b * mu * psi) * (a - b * mu * psi) - psi * (1.0 - psi);
  }
  return o;
}

}  // namespace detail

inline double mzip_loglik(const Eigen::VectorXd& alpha,
                          const Eigen::VectorXd& gamma,
                          const Eigen::MatrixXd& design,
                          const Eigen::VectorXd& y) {
  if (alpha.size() != design.cols() || gamma.size() != design.cols())
    throw DimensionError("mzip_loglik: coefficient/design size mismatch");
  const Eigen::VectorXd u = design * gamma;
  const Eigen::VectorXd v = design * alpha;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    ll += detail::mzip_obs(u[i], v[i], y[i]).ll;
  if (std::isnan(ll)) throw NonFiniteError("mzip_loglik: NaN log-likelihood");
  return ll;
}

// Gradient with respect to (gamma, alpha), in that order.
inline Eigen::VectorXd mzip_score(const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& gamma,
                                  const Eigen::MatrixXd& design,
                                  const Eigen::VectorXd& y) {
  const Eigen::Index p = design.cols();
  const Eigen::VectorXd u = design * gamma;
  const Eigen::VectorXd v = design * alpha;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * p);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto o = detail::mzip_obs(u[i], v[i], y[i]);
    g.head(p) += o.s_u * design.row(i).transpose();
    g.tail(p) += o.s_v * design.row(i).transpose();
  }
  if (!g.allFinite()) throw NonFiniteError("mzip_score: non-finite gradient");
  return g;
}

namespace detail {

inline Eigen::MatrixXd mzip_hessian(const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& gamma,
                                    const Eigen::MatrixXd& design,
                                    const Eigen::VectorXd& y) {
  const Eigen::Index p = design.cols();
  const Eigen::VectorXd u = design * gamma;
  const Eigen::VectorXd v = design * alpha;
  Eigen::ArrayXd w_uu(y.size()), w_uv(y.size()), w_vv(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto o = mzip_obs(u[i], v[i], y[i]);
    w_uu[i] = o.h_uu;
    w_uv[i] = o.h_uv;
    w_vv[i] = o.h_vv;
  }
  Eigen::MatrixXd h(2 * p, 2 * p);
  h.topLeftCorner(p, p) =
      design.transpose() * w_uu.matrix().asDiagonal() * design;
  h.topRightCorner(p, p) =
      design.transpose() * w_uv.matrix().asDiagonal() * design;
  h.bottomLeftCorner(p, p) = h.topRightCorner(p, p).transpose();
  h.bottomRightCorner(p, p) =
      design.transpose() * w_vv.matrix().asDiagonal() * design;
  return h;
}

}  // namespace detail

inline MzipFit mzip_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                        const OptimSettings& settings = {}) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n <= 2 * p) throw DimensionError("mzip_fit: need n > 2p");
  detail::check_design(design, y);
  bool any_zero = false, any_pos = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] < 0.0 || y[i] != std::floor(y[i]))
      throw DimensionError("mzip_fit: response must be nonnegative integers");
    (y[i] == 0.0 ? any_zero : any_pos) = true;
  }
  if (!any_zero || !any_pos)
    throw DegenerateOutcomeError("mzip_fit: response needs zeros and positives");

  // Starting values: gamma from a zero-indicator logistic fit, alpha from a
  // plain Poisson fit.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * p);
  {
    const Eigen::VectorXd is_zero =
        (y.array() == 0.0).cast<double>().matrix();
    const GlmFit lf = fit_logistic(design, is_zero, settings);
    if (lf.converged) x0.head(p) = lf.coefficients;
    const GlmFit pf = fit_poisson(design, y, settings);
    if (pf.converged) x0.tail(p) = pf.coefficients;
  }

  Objective obj;
  obj.value = [&](const Eigen::VectorXd& x) {
    return mzip_loglik(x.tail(p), x.head(p), design, y);
  };
  obj.gradient = [&](const Eigen::VectorXd& x) {
    return mzip_score(x.tail(p), x.head(p), design, y);
  };
  obj.hessian = [&](const Eigen::VectorXd& x) {
    return detail::mzip_hessian(x.tail(p), x.head(p), design, y);
  };
  const OptimResult opt = maximize(obj, x0, settings);

  MzipFit fit;
  fit.gamma = opt.parameters.head(p);
  fit.alpha = opt.parameters.tail(p);
  fit.loglik = opt.loglik;
  fit.converged = opt.converged;
  fit.n = n;
  fit.p = p;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(-opt.hessian);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse();
    fit.cov_joint = 0.5 * (cov + cov.transpose());
    const Eigen::VectorXd u = design * fit.gamma;
    const Eigen::VectorXd v = design * fit.alpha;
    Eigen::MatrixXd scores(n, 2 * p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto o = detail::mzip_obs(u[i], v[i], y[i]);
      scores.row(i).head(p) = o.s_u * design.row(i);
      scores.row(i).tail(p) = o.s_v * design.row(i);
    }
    fit.cov_joint_robust = sandwich_covariance(scores, opt.hessian);
  } else {
    fit.cov_joint = Eigen::MatrixXd::Constant(
        2 * p, 2 * p, std::numeric_limits<double>::quiet_NaN());
    fit.cov_joint_robust = fit.cov_joint;
    fit.converged = false;
  }
  return fit;
}

inline MzipMeans mzip_means(const MzipFit& fit, const Eigen::MatrixXd& design) {
  if (design.cols() != fit.p)
    throw DimensionError("mzip_means: design column count mismatch");
  MzipMeans m;
  m.psi = (design * fit.gamma)
              .unaryExpr([](double e) { return expit(e); });
  m.nu = (design * fit.alpha).array().exp().matrix();
  m.mu = (m.nu.array() / (1.0 - m.psi.array())).matrix();
  return m;
}

}  // namespace mzipmed

#endif
