#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "mzipmed/errors.hpp"
#include "mzipmed/optimize.hpp"

using namespace mzipmed;

TEST_CASE("finite_diff_gradient matches analytic gradient") {
  const auto f = [](const Eigen::VectorXd& x) {
    return std::sin(x[0]) + x[1] * x[1] * x[0] + std::exp(0.3 * x[2]);
  };
  Eigen::VectorXd x(3);
  x << 0.4, -1.2, 0.7;
  const Eigen::VectorXd g = finite_diff_gradient(f, x);
  CHECK(g[0] == Catch::Approx(std::cos(0.4) + 1.44).epsilon(1e-7));
  CHECK(g[1] == Catch::Approx(2.0 * (-1.2) * 0.4).epsilon(1e-7));
  CHECK(g[2] == Catch::Approx(0.3 * std::exp(0.21)).epsilon(1e-7));
}

TEST_CASE("finite_diff_hessian is symmetric and accurate") {
  const auto grad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g[0] = 2.0 * x[0] + x[1];
    g[1] = x[0] + 6.0 * x[1];
    return g;
  };
  Eigen::VectorXd x(2);
  x << 1.0, -2.0;
  const Eigen::MatrixXd h = finite_diff_hessian(grad, x);
  CHECK(h(0, 0) == Catch::Approx(2.0).epsilon(1e-7));
  CHECK(h(0, 1) == Catch::Approx(1.0).epsilon(1e-7));
  CHECK(h(1, 0) == h(0, 1));
  CHECK(h(1, 1) == Catch::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("maximize solves a concave quadratic in one Newton step") {
  // f(x) = -0.5 (x-t)' A (x-t), A positive definite
  Eigen::MatrixXd a(2, 2);
  a << 4.0, 1.0, 1.0, 3.0;
  Eigen::VectorXd t(2);
  t << 2.0, -1.0;
  Objective obj;
  obj.value = [&](const Eigen::VectorXd& x) {
    return -0.5 * (x - t).dot(a * (x - t));
  };
  obj.gradient = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-a * (x - t));
  };
  obj.hessian = [&](const Eigen::VectorXd&) { return Eigen::MatrixXd(-a); };
  const OptimResult res = maximize(obj, Eigen::VectorXd::Zero(2));
  REQUIRE(res.converged);
  CHECK(res.iterations <= 3);
  CHECK(res.parameters[0] == Catch::Approx(2.0).margin(1e-9));
  CHECK(res.parameters[1] == Catch::Approx(-1.0).margin(1e-9));
  CHECK((res.hessian + a).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("maximize works without an analytic Hessian") {
  Objective obj;
  obj.value = [](const Eigen::VectorXd& x) {
    return -std::pow(x[0] - 1.0, 4) - 2.0 * x[1] * x[1];
  };
  obj.gradient = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g[0] = -4.0 * std::pow(x[0] - 1.0, 3);
    g[1] = -4.0 * x[1];
    return g;
  };
  const OptimResult res = maximize(obj, Eigen::VectorXd::Zero(2));
  REQUIRE(res.converged);
  CHECK(res.parameters[0] == Catch::Approx(1.0).margin(1e-2));
  CHECK(res.parameters[1] == Catch::Approx(0.0).margin(1e-8));
}

TEST_CASE("maximize recovers from an indefinite region via gradient steps") {
  // f has a saddle shape near the start but a unique maximum at 0
  Objective obj;
  obj.value = [](const Eigen::VectorXd& x) {
    return -std::cosh(x[0]) - std::cosh(x[1]) + 2.0;
  };
  obj.gradient = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g[0] = -std::sinh(x[0]);
    g[1] = -std::sinh(x[1]);
    return g;
  };
  Eigen::VectorXd init(2);
  init << 3.0, -2.0;
  const OptimResult res = maximize(obj, init);
  REQUIRE(res.converged);
  CHECK(res.parameters.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("maximize rejects a non-finite starting point") {
  Objective obj;
  obj.value = [](const Eigen::VectorXd& x) { return std::log(x[0]); };
  obj.gradient = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(1);
    g[0] = 1.0 / x[0];
    return g;
  };
  Eigen::VectorXd init(1);
  init << -1.0;
  CHECK_THROWS_AS(maximize(obj, init), NonFiniteError);
}

TEST_CASE("maximize respects the iteration cap") {
  Objective obj;
  obj.value = [](const Eigen::VectorXd& x) { return -x[0] * x[0]; };
  obj.gradient = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(1);
    g[0] = -2.0 * x[0];
    return g;
  };
  OptimSettings s;
  s.max_iterations = 1;
  s.tol_grad = 1e-300;  // unreachable
  Eigen::VectorXd init(1);
  init << 5.0;
  const OptimResult res = maximize(obj, init, s);
  CHECK(res.iterations == 1);
}
