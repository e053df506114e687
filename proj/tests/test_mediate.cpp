#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "mzipmed/mediate.hpp"
#include "mzipmed/simulate.hpp"

using namespace mzipmed;

namespace {

ResolvedData scenario_data(const std::string& preset, Eigen::Index n,
                           std::uint64_t seed) {
  ScenarioConfig cfg = scenario_preset(preset);
  cfg.n = n;
  Rng rng(seed);
  return detail::generate_resolved(cfg, rng);
}

MediationSpec default_spec() {
  MediationSpec spec;
  spec.c.resize(1);
  spec.c[0] = 2.0;
  return spec;
}

}  // namespace

TEST_CASE("design builders lay out columns as documented") {
  Eigen::VectorXd x(3), m(3);
  x << 1, 0, 1;
  m << 2, 3, 4;
  Eigen::MatrixXd c(3, 2);
  c << 5, 6, 7, 8, 9, 10;
  const Eigen::MatrixXd zy = outcome_design(x, m, c, true);
  REQUIRE(zy.cols() == 6);
  CHECK(zy(0, 0) == 1.0);
  CHECK(zy(0, 1) == 1.0);
  CHECK(zy(0, 2) == 2.0);
  CHECK(zy(0, 3) == 2.0);  // x * m
  CHECK(zy(0, 4) == 5.0);
  CHECK(zy(0, 5) == 6.0);
  const Eigen::MatrixXd zm = mediator_design(x, c);
  REQUIRE(zm.cols() == 4);
  CHECK(zm(1, 0) == 1.0);
  CHECK(zm(1, 1) == 0.0);
  CHECK(zm(1, 2) == 7.0);
}

TEST_CASE("mediate recovers the generating effects on a large dataset") {
  const ResolvedData data = scenario_data("scenario1", 5000, 11);
  const MediationSpec spec = default_spec();
  const MediationResult res = mediate(data, spec);
  REQUIRE(res.outcome_converged);
  REQUIRE(res.mediator_converged);
  // truth: NDE = e^0.41 = 1.507, NIE = e^0.15 = 1.162
  CHECK(res.effects.nde.estimate == Catch::Approx(1.507).margin(0.15));
  CHECK(res.effects.nie.estimate == Catch::Approx(1.162).margin(0.06));
  CHECK(res.effects.te.estimate ==
        res.effects.nde.estimate * res.effects.nie.estimate);
  CHECK(res.effects.nde.ci_low < res.effects.nde.estimate);
  CHECK(res.effects.nde.ci_high > res.effects.nde.estimate);
  CHECK(res.effects.nde.se > 0.0);
  CHECK(res.sigma2 == Catch::Approx(3.0).margin(0.3));
  CHECK(res.n == 5000);
}

TEST_CASE("Poisson outcome model overstates the direct effect under zero inflation") {
  // differential zero inflation (scenario 2) biases the Poisson NDE upward
  const ResolvedData data = scenario_data("scenario2", 5000, 13);
  const MediationSpec spec = default_spec();
  MediateOptions opt;
  opt.family = OutcomeFamily::mzip;
  const MediationResult mzip = mediate(data, spec, opt);
  opt.family = OutcomeFamily::poisson;
  const MediationResult pois = mediate(data, spec, opt);
  REQUIRE(mzip.outcome_converged);
  REQUIRE(pois.outcome_converged);
  CHECK(pois.effects.nde.estimate > mzip.effects.nde.estimate);
  CHECK(pois.gamma.size() == 0);
  CHECK(mzip.gamma.size() == 4);
}

TEST_CASE("robust delta SEs differ from model SEs but stay comparable") {
  const ResolvedData data = scenario_data("scenario1", 2000, 17);
  MediationSpec spec = default_spec();
  const MediationResult model = mediate(data, spec);
  spec.se_method = SeMethod::delta_robust;
  const MediationResult robust = mediate(data, spec);
  CHECK(model.effects.nde.estimate == robust.effects.nde.estimate);
  CHECK(robust.effects.nde.se != model.effects.nde.se);
  const double ratio = robust.effects.nde.se / model.effects.nde.se;
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);
}

TEST_CASE("null exposure contrast gives unit effects and degenerate CIs") {
  const ResolvedData data = scenario_data("scenario1", 1000, 19);
  MediationSpec spec = default_spec();
  spec.x = spec.x_star = 1.0;
  const MediationResult res = mediate(data, spec);
  CHECK(res.effects.nde.estimate == 1.0);
  CHECK(res.effects.nie.estimate == 1.0);
  CHECK(res.effects.nde.ci_low == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(res.effects.nde.ci_high == Catch::Approx(1.0).epsilon(1e-12));
  CHECK((std::isnan(res.effects.pm) || res.effects.pm == 0.0));
}

TEST_CASE("fill_default_c uses covariate means") {
  Eigen::MatrixXd c(4, 2);
  c << 1, 10, 2, 20, 3, 30, 4, 40;
  MediationSpec spec;
  fill_default_c(spec, c);
  REQUIRE(spec.c.size() == 2);
  CHECK(spec.c[0] == Catch::Approx(2.5));
  CHECK(spec.c[1] == Catch::Approx(25.0));
  // an explicit c is left alone
  MediationSpec spec2;
  spec2.c.resize(2);
  spec2.c << 7.0, 8.0;
  fill_default_c(spec2, c);
  CHECK(spec2.c[0] == 7.0);
}

TEST_CASE("bootstrap is deterministic in the seed and thread count") {
  const ResolvedData data = scenario_data("scenario1", 400, 23);
  MediationSpec spec = default_spec();
  spec.se_method = SeMethod::bootstrap;
  MediateOptions opt;
  opt.bootstrap_reps = 60;
  opt.seed = 5;
  opt.threads = 1;
  const MediationResult a = mediate(data, spec, opt);
  opt.threads = 4;
  const MediationResult b = mediate(data, spec, opt);
  CHECK(a.effects.nde.se == b.effects.nde.se);
  CHECK(a.effects.nde.ci_low == b.effects.nde.ci_low);
  CHECK(a.effects.nie.ci_high == b.effects.nie.ci_high);
  CHECK(a.bootstrap_failures == b.bootstrap_failures);

  opt.seed = 6;
  const MediationResult c = mediate(data, spec, opt);
  CHECK(c.effects.nde.se != a.effects.nde.se);
}

TEST_CASE("bootstrap CIs bracket the point estimate on healthy data") {
  const ResolvedData data = scenario_data("scenario1", 800, 29);
  MediationSpec spec = default_spec();
  spec.se_method = SeMethod::bootstrap;
  MediateOptions opt;
  opt.bootstrap_reps = 200;
  opt.threads = 4;
  const MediationResult res = mediate(data, spec, opt);
  CHECK(res.bootstrap_reps == 200);
  CHECK(res.effects.nde.ci_low < res.effects.nde.estimate);
  CHECK(res.effects.nde.ci_high > res.effects.nde.estimate);
  CHECK(res.effects.nie.se > 0.0);
}

TEST_CASE("bootstrap reports TooManyFailures on degenerate data") {
  // a handful of positive counts: the full-sample fit converges, but enough
  // resamples lose them (or nearly so) that refits fail past the 10% cap
  ResolvedData data;
  const Eigen::Index n = 20;
  data.outcome = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < 5; ++j) data.outcome[j] = 1.0 + 2.0 * j;
  data.exposure.resize(n);
  data.mediator.resize(n);
  data.covariates.resize(n, 1);
  Rng rng(31);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.exposure[i] = rng.bernoulli(0.5);
    data.mediator[i] = rng.normal(0.0, 1.0);
    data.covariates(i, 0) = rng.exponential(2.0);
  }
  MediationSpec spec = default_spec();
  spec.se_method = SeMethod::bootstrap;
  MediateOptions opt;
  opt.bootstrap_reps = 50;
  CHECK_THROWS_AS(mediate(data, spec, opt), TooManyFailuresError);
  CHECK_THROWS_AS([&] {
    MediateOptions bad;
    bad.bootstrap_reps = 1;
    return bootstrap_effects(data, spec, bad);
  }(), DimensionError);
}

TEST_CASE("binary mediator path works end to end") {
  const ResolvedData data = scenario_data("binary1", 3000, 37);
  MediationSpec spec = default_spec();
  spec.mediator_type = MediatorType::binary;
  const MediationResult res = mediate(data, spec);
  REQUIRE(res.outcome_converged);
  REQUIRE(res.mediator_converged);
  // truth: NDE = e^0.41
  CHECK(res.effects.nde.estimate == Catch::Approx(1.507).margin(0.2));
  CHECK(res.effects.nde.se > 0.0);
  CHECK(res.theta.size() == 3);
}

TEST_CASE("difference scale reports additive effects") {
  const ResolvedData data = scenario_data("scenario1", 3000, 41);
  MediationSpec spec = default_spec();
  spec.scale = EffectScale::difference;
  const MediationResult res = mediate(data, spec);
  REQUIRE(res.outcome_converged);
  CHECK(res.effects.te.estimate ==
        res.effects.nde.estimate + res.effects.nie.estimate);
  CHECK(res.effects.nde.ci_low ==
        Catch::Approx(res.effects.nde.estimate -
                      normal_quantile(0.975) * res.effects.nde.se)
            .epsilon(1e-10));
}
