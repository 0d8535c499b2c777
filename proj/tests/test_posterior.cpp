#include "doctest.h"

#include "bmt/posterior.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

TEST_CASE("identity target has zero drift") {
  auto g = make_standard_gaussian(3);
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = rng.uniform() * 0.999;
    const Vec x = 5.0 * rng.normal_vector(3);
    worst = std::max(worst, drift(g, t, x).cwiseAbs().maxCoeff());
    CHECK(drift_jacobian(g, t, x).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("uniform interval posterior against quadrature") {
  auto u = make_uniform_interval(1.0);
  const Vec x = Vec::Constant(1, 0.2);
  CHECK(drift(u, 0.3, x)[0] == Approx(0.43695328295173448).epsilon(1e-10));
  CHECK(drift_jacobian(u, 0.3, x)(0, 0) == Approx(-1.2609620958528224).epsilon(1e-9));
  CHECK(log_heat_semigroup(u, 0.7, x) == Approx(0.22153128473951591).epsilon(1e-10));
}

TEST_CASE("truncated gaussian posterior against quadrature") {
  auto m = make_truncated_gaussian(2.0);
  const Vec x = Vec::Constant(1, -0.3);
  CHECK(drift(m, 0.5, x)[0] == Approx(1.4533700890671337).epsilon(1e-11));
  CHECK(drift_jacobian(m, 0.5, x)(0, 0) == Approx(-1.5378581516666720).epsilon(1e-10));
  CHECK(log_heat_semigroup(m, 0.5, x) == Approx(-0.27733839849705632).epsilon(1e-11));
}

TEST_CASE("closed forms agree with Gauss-Hermite") {
  Mat cov(2, 2);
  cov << 1.5, 0.4, 0.4, 0.7;
  Vec a(2);
  a << 0.3, -0.2;
  auto g = make_gaussian(a, cov);
  auto ball = make_uniform_ball(2.0, 2);
  MixtureSpec mix;
  mix.atoms = {Vec::Constant(2, 0.5), Vec::Constant(2, -0.5)};
  mix.weights = {0.3, 0.7};
  auto mx = make_gaussian_mixture(mix);
  for (const auto* m : {&g, &mx}) {
    CAPTURE(m->label());
    for (double t : {0.5, 0.9}) {
      const Vec x = Vec::Constant(2, 0.4);
      const auto cf = posterior_moments(*m, t, x);
      const auto gh = gauss_hermite_posterior(*m, 1.0 - t, x);
      CHECK((cf.mean - gh.mean).norm() < 1e-8);
      CHECK((cf.cov - gh.cov).norm() < 1e-8);
      CHECK(cf.log_mass == Approx(gh.log_mass).epsilon(1e-8));
    }
  }
  // polar quadrature oracle
  const auto cf = posterior_moments(ball, 0.2, Vec::Constant(2, 0.3));
  CHECK(cf.mean[0] == Approx(0.09078338952420462).epsilon(1e-9));
  CHECK(cf.mean[1] == Approx(cf.mean[0]).epsilon(1e-12));
}

TEST_CASE("fallback when Gauss-Hermite does not converge") {
  // At t = 0.1 f grows faster than the Gaussian weight along the top
  // eigenvector; node doubling never settles and sampling takes over.
  Mat cov(2, 2);
  cov << 1.5, 0.4, 0.4, 0.7;
  Vec a(2);
  a << 0.3, -0.2;
  auto g = make_gaussian(a, cov);
  auto custom = make_custom(
      2, [g](const Vec& y) { return g.log_f(y); }, [g](const Vec& y) { return g.grad_log_f(y); }, 0.0, kInf, "wrapped");
  const Vec x = Vec::Constant(2, 0.4);
  const auto cf = posterior_moments(g, 0.1, x);
  const auto fb = posterior_moments(custom, 0.1, x);
  CHECK(fb.method == PosteriorMethod::monte_carlo);
  CHECK((fb.mean - cf.mean).norm() < 2e-2);
  const auto ok = posterior_moments(custom, 0.5, x);
  CHECK(ok.method == PosteriorMethod::gauss_hermite);
  CHECK((ok.mean - posterior_moments(g, 0.5, x).mean).norm() < 1e-8);
}

TEST_CASE("monte carlo fallback is close to the closed form") {
  auto m = make_truncated_gaussian(1.0);
  const Vec x = Vec::Constant(1, 0.4);
  const auto cf = posterior_moments(m, 0.6, x);
  const auto mc = monte_carlo_posterior(m, 0.4, x, 1 << 16);
  CHECK(mc.mean[0] == Approx(cf.mean[0]).epsilon(2e-2));
  CHECK(mc.method == PosteriorMethod::monte_carlo);
}

TEST_CASE("product posterior factorizes") {
  auto p = make_product({make_truncated_gaussian(1.0), make_uniform_interval(1.0)});
  Vec x(2);
  x << 0.1, 0.6;
  const auto pm = posterior_moments(p, 0.4, x);
  CHECK(pm.mean[0] == Approx(posterior_moments(make_truncated_gaussian(1.0), 0.4, x.head(1)).mean[0]));
  CHECK(pm.mean[1] == Approx(posterior_moments(make_uniform_interval(1.0), 0.4, x.tail(1)).mean[0]));
  CHECK(pm.cov(0, 1) == 0.0);
}

TEST_CASE("domain errors") {
  auto g = make_standard_gaussian(1);
  CHECK_THROWS_AS(drift(g, 1.0, Vec::Zero(1)), DomainError);
  CHECK_THROWS_AS(drift(g, -0.1, Vec::Zero(1)), DomainError);
}
