#include "doctest.h"

#include "bmt/follmer.hpp"
#include "bmt/measures.hpp"
#include "bmt/posterior.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

namespace {

std::vector<TargetMeasure> catalog() {
  MixtureSpec mix;
  mix.atoms = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  mix.weights = {0.5, 0.5};
  Mat cov(2, 2);
  cov << 2.0, 0.3, 0.3, 0.5;
  return {make_standard_gaussian(1),
          make_gaussian(Vec::Constant(2, 0.5), cov),
          make_truncated_gaussian(1.0),
          make_truncated_gaussian(2.0),
          make_uniform_interval(1.0),
          make_uniform_ball(2.0, 2),
          make_gaussian_mixture(mix),
          make_isotropic_uniform(3)};
}

}  // namespace

TEST_CASE("catalog constants") {
  auto u = make_uniform_interval(1.0);
  CHECK(u.kappa() == 0.0);
  CHECK(u.diam() == 1.0);
  CHECK(moments_1d(u).second == Approx(1.0 / 12.0).epsilon(1e-12));
  CHECK(make_truncated_gaussian(1.0).kappa() == 2.0);
  CHECK(make_truncated_gaussian(2.0).kappa() == 1.5);
  CHECK(truncated_gaussian_normalizer(1.0) == Approx(0.35355339059327376).epsilon(1e-15));
  auto ball = make_uniform_ball(2.0, 2);
  CHECK(ball.support_contains(Vec::Constant(2, 0.7)));
  CHECK_FALSE(ball.support_contains(Vec::Constant(2, 0.71)));
  auto tg = make_truncated_gaussian(1.0);
  CHECK(moments_1d(tg).first == Approx(0.5641895835477563).epsilon(1e-10));
}

TEST_CASE("mixture densities") {
  MixtureSpec one;
  one.atoms = {Vec::Zero(2)};
  one.weights = {1.0};
  auto g = make_gaussian_mixture(one);
  CHECK(g.log_f(Vec::Constant(2, 1.3)) == Approx(0.0));
  Vec a(2);
  a << 0.4, -1.1;
  one.atoms = {a};
  auto ga = make_gaussian_mixture(one);
  CHECK((ga.grad_log_f(Vec::Constant(2, 0.2)) - a).norm() < 1e-14);
  MixtureSpec two;
  two.atoms = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  two.weights = {0.5, 0.5};
  auto m = make_gaussian_mixture(two);
  CHECK(std::exp(m.log_f(Vec::Constant(1, 0.7))) == Approx(0.7612984850361860).epsilon(1e-14));
  CHECK(m.mixture_radius().value() == 1.0);
  MixtureSpec empty;
  CHECK_THROWS_AS(make_gaussian_mixture(empty), InvalidInput);
}

TEST_CASE("invalid inputs") {
  Mat bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(make_gaussian(Vec::Zero(2), bad), InvalidInput);
  CHECK_THROWS_AS(make_truncated_gaussian(0.5), InvalidInput);
  CHECK_THROWS_AS(make_uniform_interval(-1.0), InvalidInput);
}

TEST_CASE("relative entropy oracles") {
  CHECK(relative_entropy(make_gaussian(Vec::Constant(1, 1.0), Mat::Identity(1, 1))) == Approx(0.5).epsilon(1e-12));
  CHECK(relative_entropy(make_truncated_gaussian(1.0)) == Approx(0.7897207708399180).epsilon(1e-9));
  CHECK(relative_entropy(make_uniform_interval(1.0)) == Approx(1.0856051998713394).epsilon(1e-9));
}

TEST_CASE("normalization over the catalog") {
  for (const auto& m : catalog()) {
    CAPTURE(m.label());
    CHECK(std::abs(log_heat_semigroup(m, 1.0, Vec::Zero(m.dim()))) < 1e-3);
  }
}

TEST_CASE("convexity certificate") {
  Rng rng(11);
  for (const auto& m : catalog()) {
    if (m.label() == "gaussian_mixture") continue;
    CAPTURE(m.label());
    const int d = m.dim();
    for (int k = 0; k < 100; ++k) {
      Vec x = m.sample(rng);
      if (m.label() != "gaussian") {
        // stay off the boundary where the second difference is undefined
        Vec probe = x;
        bool inside = true;
        for (int i = 0; i < d && inside; ++i)
          for (double h : {1e-3, -1e-3}) {
            probe = x;
            probe[i] += h;
            inside = inside && m.support_contains(probe);
          }
        if (!inside) continue;
      }
      const double h = 1e-4;
      auto U = [&](const Vec& y) { return -m.log_f(y) + 0.5 * y.squaredNorm(); };
      Mat H(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          Vec pp = x, pm = x, mp = x, mm = x;
          pp[i] += h, pp[j] += h;
          pm[i] += h, pm[j] -= h;
          mp[i] -= h, mp[j] += h;
          mm[i] -= h, mm[j] -= h;
          H(i, j) = (U(pp) - U(pm) - U(mp) + U(mm)) / (4 * h * h);
        }
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
      CHECK(es.eigenvalues().minCoeff() >= m.kappa() - 1e-4);
    }
  }
}

TEST_CASE("sampler consistency in 1D") {
  for (const auto& m : {make_standard_gaussian(1), make_truncated_gaussian(2.0), make_uniform_interval(1.0)}) {
    Rng rng(5);
    std::vector<double> x(100000);
    for (auto& v : x) v = m.sample(rng)[0];
    CHECK(ks_statistic(x, [&](double y) { return m.cdf(y); }) < 0.01);
  }
}

TEST_CASE("quantile inversion") {
  MixtureSpec two;
  two.atoms = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  two.weights = {0.5, 0.5};
  const auto m = make_gaussian_mixture(two);
  CHECK(m.quantile(0.975) == Approx(2.64614554821531113742828449013).epsilon(1e-12));
  CHECK(m.quantile(1e-6) == Approx(-5.61138434062126764283211787939).epsilon(1e-12));
  CHECK(std::abs(m.quantile(0.5)) < 1e-12);
  for (const auto& t : catalog()) {
    if (t.dim() != 1 || !t.has_cdf()) continue;
    for (double u : {1e-9, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-9}) CHECK(t.cdf(t.quantile(u)) == Approx(u).epsilon(1e-9));
  }
}
