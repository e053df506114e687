#ifndef MZIPMED_OPTIMIZE_HPP
#define MZIPMED_OPTIMIZE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

#include "errors.hpp"

namespace mzipmed {

struct OptimSettings {
  int max_iterations = 200;
  double tol_loglik = 1e-8;
  double tol_grad = 1e-6;
  int step_halving_max = 30;
};

struct OptimResult {
  Eigen::VectorXd parameters;
  double loglik = -std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd hessian;
  bool converged = false;
  int iterations = 0;
};

struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  // Optional; when absent the Hessian is formed by central differences of the
  // gradient.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

inline Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 0.0) {
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h > 0.0 ? h : h0 * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + hi;
    const double fp = f(xp);
    xp[i] = x[i] - hi;
    const double fm = f(xp);
    xp[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteError("finite_diff_gradient: objective not finite near x");
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

inline Eigen::MatrixXd finite_diff_hessian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x) {
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  const Eigen::Index p = x.size();
  Eigen::MatrixXd h(p, p);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double hi = h0 * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + hi;
    const Eigen::VectorXd gp = grad(xp);
    xp[i] = x[i] - hi;
    const Eigen::VectorXd gm = grad(xp);
    xp[i] = x[i];
    h.col(i) = (gp - gm) / (2.0 * hi);
  }
  return 0.5 * (h + h.transpose());
}

// Newton ascent with step-halving. The search direction is the Newton step
// when the negative Hessian is positive definite, otherwise the raw gradient.
inline OptimResult maximize(const Objective& objective,
                            const Eigen::VectorXd& init,
                            const OptimSettings& settings = {}) {
  OptimResult res;
  res.parameters = init;
  res.loglik = objective.value(init);
  if (!std::isfinite(res.loglik))
    throw NonFiniteError("maximize: objective not finite at initial point");

  const auto hess_at = [&](const Eigen::VectorXd& x) {
    return objective.hessian ? objective.hessian(x)
                             : finite_diff_hessian(objective.gradient, x);
  };

  Eigen::VectorXd g = objective.gradient(res.parameters);
  res.gradient_norm = g.cwiseAbs().maxCoeff();
  // Gradient tolerance scaled by the objective magnitude so that large-n
  // likelihoods are not held to an unattainable absolute cutoff.
  const auto gtol = [&] {
    return settings.tol_grad * (1.0 + std::abs(res.loglik));
  };

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    res.iterations = iter;
    if (res.gradient_norm <= gtol()) {
      res.converged = true;
      break;
    }

    Eigen::MatrixXd h = hess_at(res.parameters);
    Eigen::VectorXd dir;
    Eigen::LLT<Eigen::MatrixXd> llt(-h);
    if (llt.info() == Eigen::Success) {
      dir = llt.solve(g);
      if (!dir.allFinite() || dir.dot(g) <= 0.0) dir = g;
    } else {
      dir = g;  // indefinite Hessian far from the optimum
    }

    double step = 1.0;
    bool accepted = false;
    bool saw_finite = false;
    double new_ll = res.loglik;
    Eigen::VectorXd candidate;
    for (int half = 0; half <= settings.step_halving_max; ++half) {
      candidate = res.parameters + step * dir;
      new_ll = objective.value(candidate);
      if (std::isfinite(new_ll)) {
        saw_finite = true;
        if (new_ll >= res.loglik) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!saw_finite)
      throw NonFiniteError("maximize: objective not finite at every halved step");
    if (!accepted) {
      // The objective is rounding-limited here; a full Newton step that holds
      // the loglik to within rounding while shrinking the gradient still
      // makes progress toward the stationary point.
      const Eigen::VectorXd full = res.parameters + dir;
      const double full_ll = objective.value(full);
      if (std::isfinite(full_ll) &&
          std::abs(full_ll - res.loglik) <=
              1e-10 * (1.0 + std::abs(res.loglik))) {
        const Eigen::VectorXd gf = objective.gradient(full);
        if (gf.allFinite() && gf.cwiseAbs().maxCoeff() < res.gradient_norm) {
          res.parameters = full;
          res.loglik = full_ll;
          g = gf;
          res.gradient_norm = gf.cwiseAbs().maxCoeff();
          if (res.gradient_norm <= gtol()) res.converged = true;
          continue;
        }
      }
      break;  // stalled; report non-convergence diagnostics
    }

    const bool no_progress = new_ll == res.loglik && step == 1.0;
    res.parameters = candidate;
    res.loglik = new_ll;
    g = objective.gradient(res.parameters);
    if (!g.allFinite())
      throw NonFiniteError("maximize: gradient not finite at accepted iterate");
    res.gradient_norm = g.cwiseAbs().maxCoeff();
    if (res.gradient_norm <= gtol()) {
      res.converged = true;
      break;
    }
    if (no_progress) {
      // Numerically flat at a full Newton step; nothing further to gain.
      res.converged = res.gradient_norm <= gtol();
      break;
    }
  }

  Eigen::MatrixXd h = hess_at(res.parameters);
  res.hessian = 0.5 * (h + h.transpose());
  return res;
}

}  // namespace mzipmed

#endif
