#include "doctest.h"

#include "bmt/follmer.hpp"
#include "bmt/posterior.hpp"
#include "bmt/special.hpp"
#include "bmt/wiener_maps.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

TEST_CASE("mills root") {
  const double c = find_c();
  CHECK(c == Approx(-1.1252994236370873).epsilon(1e-13));
  CHECK(std::abs(mills_prime(c) - 1.0 / 3.0) < 1e-12);
  CHECK(mills_prime(-1.2) < 1.0 / 3.0);
  CHECK(mills_prime(-1.0) > 1.0 / 3.0);
}

TEST_CASE("eta path") {
  const auto d = make_mills_data(1.0);
  const double eps = 1e-3;
  const auto eta = eta_path(d, eps);
  CHECK(eta(eps) == Approx(-d.c_star * std::sqrt((1 - eps) * (1 - eps + 1.0) / 1.0)).epsilon(1e-14));
  CHECK(eta(0.0) == 0.0);
  CHECK(eta(0.5 * eps) == Approx(0.5 * eta(eps)));
  CHECK(eta(0.3) > eta(0.6));
  CHECK_THROWS_AS(eta_path(d, 0.7), InvalidInput);
}

TEST_CASE("closed-form log derivatives agree with the posterior module") {
  for (double sigma : {1.0, 2.0, 5.0}) {
    auto m = make_truncated_gaussian(sigma);
    Rng rng(static_cast<std::uint64_t>(sigma * 10));
    for (int i = 0; i < 100; ++i) {
      const double t = 0.95 * rng.uniform();
      const double x = 4.0 * rng.normal();
      const auto ld = logP_derivatives(sigma, t, x);
      const Vec xv = Vec::Constant(1, x);
      CHECK(ld.first == Approx(drift(m, t, xv)[0]).epsilon(1e-8));
      CHECK(ld.second == Approx(drift_jacobian(m, t, xv)(0, 0)).epsilon(1e-8));
      CHECK(ld.second < 0.0);
    }
  }
  // far in the support the Gaussian part dominates
  const auto ld = logP_derivatives(1.0, 0.99, 5.0);
  CHECK(ld.second == Approx(-1.0 / 1.01).epsilon(1e-12));
}

TEST_CASE("sandwich along eta") {
  for (double s : {1.0, 2.0}) {
    const auto r = sandwich_check(make_mills_data(s), 1e-3, 10000);
    CHECK(r.violations == 0);
    CHECK(r.points == 10000);
  }
}

TEST_CASE("L(eps) grows and stays above the floor") {
  const auto d = make_mills_data(1.0);
  const auto c = growth_curve(d, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  for (std::size_t i = 0; i < c.L_values.size(); ++i) {
    CHECK(c.L_values[i] * c.L_values[i] >= c.log_floor[i]);
    if (i) CHECK(c.L_values[i] > c.L_values[i - 1]);
  }
  CHECK(c.slope >= 0.9 / 128.0);
  CHECK_THROWS_AS(growth_curve(d, {1e-3, 1e-2}), InvalidInput);
  const double e5 = eps_exceeding(d, 5.0);
  CHECK(e5 > 0.0);
  CHECK(derivative_norm_lower_bound(d, e5, eta_path(d, e5)) > 5.0);
}

TEST_CASE("one-dimensional OT maps") {
  const auto id = ot_map_1d(make_standard_gaussian(1));
  const auto sh = ot_map_1d(make_gaussian(Vec::Constant(1, 0.7), Mat::Identity(1, 1)));
  const auto sc = ot_map_1d(make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, 0.5)));
  for (int i = 0; i <= 80; ++i) {
    const double x = -4.0 + 0.1 * i;
    CHECK(std::abs(id(x) - x) < 1e-10);
    CHECK(std::abs(sh(x) - x - 0.7) < 1e-10);
    CHECK(std::abs(sc(x) - std::sqrt(0.5) * x) < 1e-10);
  }
  CHECK(sc.derivative(0.3) == Approx(std::sqrt(0.5)).epsilon(1e-8));
  auto u = make_uniform_interval(1.0);
  const auto T = ot_map_1d(u);
  Rng rng(2);
  std::vector<double> pushed(20000);
  for (auto& v : pushed) v = T(rng.normal());
  CHECK(ks_statistic(pushed, [&](double y) { return u.cdf(y); }) < 0.015);
}

TEST_CASE("OT contraction ratios") {
  auto g = wiener_ot_contraction_check(make_standard_gaussian(1), 1.0, 200, 1);
  CHECK(g.max_ratio == Approx(1.0).epsilon(1e-9));
  auto n = wiener_ot_contraction_check(make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, 0.5)), 2.0, 500, 2);
  CHECK(n.violations == 0);
  CHECK(n.max_ratio <= 1.0 + 1e-12);
  auto t = wiener_ot_contraction_check(make_truncated_gaussian(1.0), 2.0, 2000, 3);
  CHECK(t.violations == 0);
  CHECK(t.ratios.size() == 2000);
}
