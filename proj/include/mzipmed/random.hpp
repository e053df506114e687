#ifndef MZIPMED_RANDOM_HPP
#define MZIPMED_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "errors.hpp"

namespace mzipmed {

// Deterministic sampler built on mt19937_64. All variate transforms are
// implemented here (rather than via std::*_distribution) so that a given
// (seed, stream) pair yields identical draws on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix(seed)) {}

  // Independent stream for parallel work: replicate r of a study seeded with s
  // uses Rng(s, r), so results do not depend on thread count or schedule.
  Rng(std::uint64_t seed, std::uint64_t stream)
      : eng_(mix(mix(seed) + 0x9e3779b97f4a7c15ull * (stream + 1))) {}

  // Uniform on (0, 1), endpoints excluded.
  double uniform() {
    const double u = (eng_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  double exponential(double mean) { return -mean * std::log(uniform()); }

  double normal(double mu = 0.0, double sd = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mu + sd * spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mu + sd * r * std::cos(a);
  }

  // Poisson by sequential inversion. For large means the rate is consumed in
  // chunks of at most 500 so the running product never underflows.
  long poisson(double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw NonFiniteError("poisson rate must be finite and non-negative");
    long total = 0;
    while (mu > 0.0) {
      const double chunk = mu > 500.0 ? 500.0 : mu;
      mu -= chunk;
      double p = std::exp(-chunk);
      double cdf = p;
      const double u = uniform();
      long k = 0;
      while (u > cdf && k < 100000) {
        ++k;
        p *= chunk / static_cast<double>(k);
        cdf += p;
      }
      total += k;
    }
    return total;
  }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw NonFiniteError("gamma parameters must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  // Gamma-Poisson mixture with E = mean and Var = mean + mean^2 / omega.
  long neg_binomial(double mean, double omega) {
    if (!(omega > 0.0)) throw NonFiniteError("neg_binomial omega must be positive");
    if (mean <= 0.0) return 0;
    return poisson(gamma(omega, mean / omega));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mzipmed

#endif
