#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "mzipmed/errors.hpp"
#include "mzipmed/mzip.hpp"
#include "mzipmed/random.hpp"

using namespace mzipmed;

namespace {

// Straight-line long-double evaluation of the MZIP log-likelihood in
// probability space: P(Y=0) = psi + (1-psi) e^{-mu},
// P(Y=y) = (1-psi) Poisson(y; mu), with mu = e^{Z alpha} / (1-psi).
long double mzip_loglik_oracle(const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& gamma,
                               const Eigen::MatrixXd& z,
                               const Eigen::VectorXd& y) {
  long double ll = 0.0L;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const long double u = static_cast<long double>(z.row(i).dot(gamma));
    const long double v = static_cast<long double>(z.row(i).dot(alpha));
    const long double psi = 1.0L / (1.0L + std::exp(-u));
    const long double mu = std::exp(v) / (1.0L - psi);
    if (y[i] == 0.0) {
      ll += std::log(psi + (1.0L - psi) * std::exp(-mu));
    } else {
      const long double yi = static_cast<long double>(y[i]);
      ll += std::log(1.0L - psi) - mu + yi * std::log(mu) -
            std::lgamma(yi + 1.0L);
    }
  }
  return ll;
}

struct Problem {
  Eigen::MatrixXd z;
  Eigen::VectorXd y;
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;
};

Problem make_problem(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  Problem pr;
  pr.z.resize(n, p);
  pr.alpha.resize(p);
  pr.gamma.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    pr.alpha[j] = rng.normal(0.0, 0.4);
    pr.gamma[j] = rng.normal(0.0, 0.4);
  }
  pr.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pr.z(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) pr.z(i, j) = rng.normal(0.0, 1.0);
    const double u = pr.z.row(i).dot(pr.gamma);
    const double mu = std::exp(pr.z.row(i).dot(pr.alpha) + softplus(u));
    pr.y[i] = rng.bernoulli(expit(u)) ? 0.0
                                      : static_cast<double>(rng.poisson(mu));
  }
  return pr;
}

}  // namespace

TEST_CASE("mzip_loglik matches a long-double probability-space oracle") {
  for (const auto& [n, p, seed] :
       {std::tuple<Eigen::Index, Eigen::Index, std::uint64_t>{60, 2, 11},
        {120, 3, 12},
        {250, 4, 13}}) {
    const Problem pr = make_problem(n, p, seed);
    const double got = mzip_loglik(pr.alpha, pr.gamma, pr.z, pr.y);
    const long double want = mzip_loglik_oracle(pr.alpha, pr.gamma, pr.z, pr.y);
    CHECK(std::abs(got - static_cast<double>(want)) <=
          1e-10 * std::abs(static_cast<double>(want)));
  }
}

TEST_CASE("mzip_score matches central finite differences") {
  // 10 random evaluation points across 3 design shapes
  int point = 0;
  for (const auto& [n, p, seed] :
       {std::tuple<Eigen::Index, Eigen::Index, std::uint64_t>{80, 2, 21},
        {150, 3, 22},
        {300, 5, 23}}) {
    const Problem pr = make_problem(n, p, seed);
    Rng rng(seed + 100);
    const int points_here = p == 5 ? 4 : 3;
    for (int t = 0; t < points_here; ++t, ++point) {
      Eigen::VectorXd par(2 * p);
      for (Eigen::Index j = 0; j < 2 * p; ++j) par[j] = rng.normal(0.0, 0.5);
      const Eigen::VectorXd g =
          mzip_score(par.tail(p), par.head(p), pr.z, pr.y);
      const Eigen::VectorXd gfd = finite_diff_gradient(
          [&](const Eigen::VectorXd& v) {
            return mzip_loglik(v.tail(p), v.head(p), pr.z, pr.y);
          },
          par);
      for (Eigen::Index j = 0; j < 2 * p; ++j)
        CHECK(std::abs(g[j] - gfd[j]) <=
              1e-6 * std::max(1.0, std::abs(gfd[j])));
    }
  }
  CHECK(point == 10);
}

TEST_CASE("mzip Hessian matches finite differences of the score") {
  const Problem pr = make_problem(150, 3, 31);
  Rng rng(32);
  Eigen::VectorXd par(6);
  for (int j = 0; j < 6; ++j) par[j] = rng.normal(0.0, 0.4);
  const Eigen::MatrixXd h =
      detail::mzip_hessian(par.tail(3), par.head(3), pr.z, pr.y);
  const Eigen::MatrixXd hfd = finite_diff_hessian(
      [&](const Eigen::VectorXd& v) {
        return mzip_score(v.tail(3), v.head(3), pr.z, pr.y);
      },
      par);
  CHECK((h - hfd).cwiseAbs().maxCoeff() <
        1e-5 * std::max(1.0, h.cwiseAbs().maxCoeff()));
}

TEST_CASE("mzip_fit recovers the generating parameters at n = 100000") {
  const Problem pr = make_problem(100000, 3, 41);
  const MzipFit fit = mzip_fit(pr.z, pr.y);
  REQUIRE(fit.converged);
  CHECK((fit.alpha - pr.alpha).cwiseAbs().maxCoeff() < 0.04);
  CHECK((fit.gamma - pr.gamma).cwiseAbs().maxCoeff() < 0.04);
  // score is (numerically) zero at the reported optimum
  const Eigen::VectorXd g = mzip_score(fit.alpha, fit.gamma, pr.z, pr.y);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-6 * (1.0 + std::abs(fit.loglik)));
  // joint covariance is symmetric with positive diagonal
  CHECK((fit.cov_joint - fit.cov_joint.transpose()).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(fit.cov_joint.diagonal().minCoeff() > 0.0);
  CHECK(fit.cov_joint_robust.diagonal().minCoeff() > 0.0);
}

TEST_CASE("mzip_fit approaches a plain Poisson fit when zeros are scarce") {
  // gamma pushed far negative: almost no excess zeros, alpha ~ Poisson rates
  Rng rng(51);
  const Eigen::Index n = 30000;
  Eigen::MatrixXd z(n, 2);
  Eigen::VectorXd y(n);
  Eigen::VectorXd alpha(2);
  alpha << 0.8, 0.4;
  for (Eigen::Index i = 0; i < n; ++i) {
    z(i, 0) = 1.0;
    z(i, 1) = rng.normal(0.0, 1.0);
    y[i] = static_cast<double>(rng.poisson(std::exp(z.row(i).dot(alpha))));
  }
  const MzipFit fit = mzip_fit(z, y);
  REQUIRE(fit.converged);
  const GlmFit pois = fit_poisson(z, y);
  REQUIRE(pois.converged);
  CHECK((fit.alpha - pois.coefficients).cwiseAbs().maxCoeff() < 0.02);
  // the excess-zero intercept should be strongly negative
  CHECK(fit.gamma[0] < -1.5);
}

TEST_CASE("mzip_fit is deterministic") {
  const Problem pr = make_problem(500, 3, 61);
  const MzipFit a = mzip_fit(pr.z, pr.y);
  const MzipFit b = mzip_fit(pr.z, pr.y);
  CHECK((a.alpha.array() == b.alpha.array()).all());
  CHECK((a.gamma.array() == b.gamma.array()).all());
  CHECK(a.loglik == b.loglik);
  CHECK((a.cov_joint.array() == b.cov_joint.array()).all());
}

TEST_CASE("mzip_fit input validation") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(20, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(20);
  CHECK_THROWS_AS(mzip_fit(z, y), DegenerateOutcomeError);  // all zeros
  y.setConstant(2.0);
  CHECK_THROWS_AS(mzip_fit(z, y), DegenerateOutcomeError);  // no zeros
  y[0] = 1.5;
  CHECK_THROWS_AS(mzip_fit(z, y), DimensionError);  // non-integer
  Eigen::MatrixXd small = Eigen::MatrixXd::Ones(2, 1);
  Eigen::VectorXd ys(2);
  ys << 0.0, 3.0;
  CHECK_THROWS_AS(mzip_fit(small, ys), DimensionError);  // n <= 2p
}

TEST_CASE("mzip_means implements the mean structure") {
  const Problem pr = make_problem(300, 3, 71);
  const MzipFit fit = mzip_fit(pr.z, pr.y);
  const MzipMeans m = mzip_means(fit, pr.z);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double u = pr.z.row(i).dot(fit.gamma);
    const double v = pr.z.row(i).dot(fit.alpha);
    CHECK(m.psi[i] == Catch::Approx(expit(u)).epsilon(1e-12));
    CHECK(m.nu[i] == Catch::Approx(std::exp(v)).epsilon(1e-12));
    // nu = (1 - psi) mu
    CHECK(m.nu[i] ==
          Catch::Approx((1.0 - m.psi[i]) * m.mu[i]).epsilon(1e-12));
  }
}
