#ifndef MZIPMED_TESTS_HELPERS_HPP
#define MZIPMED_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "mzipmed/effects.hpp"

namespace testutil {

// Deterministic test-parameter generator, independent of the library RNG.
struct ParamRng {
  std::mt19937_64 eng;
  explicit ParamRng(unsigned seed) : eng(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(eng);
  }
};

inline mzipmed::EffectParams random_effect_params(ParamRng& rng, int k,
                                                  bool interaction) {
  mzipmed::EffectParams par;
  par.theta.resize(2 + k);
  for (Eigen::Index i = 0; i < par.theta.size(); ++i)
    par.theta[i] = rng.uniform(-0.8, 0.8);
  par.alpha.resize(3 + (interaction ? 1 : 0) + k);
  for (Eigen::Index i = 0; i < par.alpha.size(); ++i)
    par.alpha[i] = rng.uniform(-0.6, 0.6);
  par.sigma2 = rng.uniform(0.3, 3.0);
  par.interaction = interaction;
  return par;
}

inline mzipmed::MediationSpec random_spec(ParamRng& rng, int k,
                                          bool interaction,
                                          mzipmed::MediatorType mt,
                                          mzipmed::EffectScale scale) {
  mzipmed::MediationSpec spec;
  spec.x = rng.uniform(-1.0, 2.0);
  spec.x_star = rng.uniform(-1.0, 2.0);
  if (std::abs(spec.x - spec.x_star) < 0.05) spec.x_star -= 0.5;
  spec.c.resize(k);
  for (int i = 0; i < k; ++i) spec.c[i] = rng.uniform(-1.0, 2.0);
  spec.m_cde = rng.uniform(-1.0, 1.0);
  spec.mediator_type = mt;
  spec.scale = scale;
  spec.interaction = interaction;
  return spec;
}

// Gauss-Hermite nodes and weights for integrals of f(t) e^{-t^2}.
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite(
    int n) {
  std::vector<double> nodes(n), weights(n);
  const double pi_qtr = std::pow(M_PI, -0.25);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // initial guesses (Numerical Recipes style)
    double z;
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z = nodes[n - 1] - 1.14 * std::pow(n, 0.426) / nodes[n - 1];
    else if (i == 2)
      z = 1.86 * nodes[n - 2] - 0.86 * nodes[n - 1];
    else if (i == 3)
      z = 1.91 * nodes[n - 3] - 0.91 * nodes[n - 2];
    else
      z = 2.0 * nodes[n - i] - nodes[n - i + 1];
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pi_qtr, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[n - 1 - i] = z;
    nodes[i] = -z;
    weights[i] = weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  return {nodes, weights};
}

// Counterfactual mean E[ Y(x, M_{m_x}) | c ] for a continuous (normal)
// mediator, integrated numerically: the independent oracle for the
// closed-form ratio effects.
inline double counterfactual_mean_gh(const mzipmed::EffectParams& par,
                                     const mzipmed::MediationSpec& spec,
                                     double x, double m_x, int n_nodes = 80) {
  const Eigen::Index k = par.theta.size() - 2;
  const double a0 = par.alpha[0], a1 = par.alpha[1], a2 = par.alpha[2];
  const double a3 = par.interaction ? par.alpha[3] : 0.0;
  const Eigen::VectorXd a4 = par.alpha.tail(k);
  const double med_mean = par.theta[0] + par.theta[1] * m_x +
                          par.theta.tail(k).dot(spec.c);
  const double sd = std::sqrt(par.sigma2);
  const auto [nodes, weights] = gauss_hermite(n_nodes);
  double acc = 0.0;
  for (int i = 0; i < n_nodes; ++i) {
    const double m = med_mean + std::sqrt(2.0) * sd * nodes[i];
    acc += weights[i] *
           std::exp(a0 + a1 * x + a2 * m + a3 * x * m + a4.dot(spec.c));
  }
  return acc / std::sqrt(M_PI);
}

// Same counterfactual mean with a Bernoulli(logistic) mediator: exact
// two-point enumeration.
inline double counterfactual_mean_binary(const mzipmed::EffectParams& par,
                                         const mzipmed::MediationSpec& spec,
                                         double x, double m_x) {
  const Eigen::Index k = par.theta.size() - 2;
  const double a0 = par.alpha[0], a1 = par.alpha[1], a2 = par.alpha[2];
  const double a3 = par.interaction ? par.alpha[3] : 0.0;
  const Eigen::VectorXd a4 = par.alpha.tail(k);
  const double p1 = mzipmed::expit(par.theta[0] + par.theta[1] * m_x +
                                   par.theta.tail(k).dot(spec.c));
  double acc = 0.0;
  for (int m = 0; m <= 1; ++m)
    acc += (m ? p1 : 1.0 - p1) *
           std::exp(a0 + a1 * x + a2 * m + a3 * x * m + a4.dot(spec.c));
  return acc;
}

}  // namespace testutil

#endif
