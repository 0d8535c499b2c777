#include "doctest.h"

#include "bmt/bounds.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

TEST_CASE("regimes and constants") {
  auto p = theta_profile(2.0, kInf);
  CHECK(p.regime == Regime::kappaS2_ge_1);
  CHECK(p.constant_sq == Approx(0.5));
  auto u = theta_profile(0.0, 1.0);
  CHECK(u.regime == Regime::kappaS2_lt_1);
  CHECK(u.constant_sq == Approx((std::exp(1.0) + 1.0) / 2.0).epsilon(1e-14));
  CHECK(u.gronwall_constant_sq == Approx(4.1945280494653251).epsilon(1e-14));
  CHECK(theta_profile(0.0, kInf).trivial());
  CHECK(mixture_constant(1.0) == Approx(3.1945280494653251).epsilon(1e-14));
  CHECK(mixture_constant(1e-9) == 1.0);
  CHECK(rescaled_constant(1e-9, 0.5, 2.0) == 2.0);
}

TEST_CASE("gronwall closed form against quadrature") {
  for (auto p : {theta_profile(2.0, kInf), theta_profile(0.0, 1.0), theta_profile(0.5, 1.2), theta_profile(1.0, 3.0)}) {
    for (int i = 1; i <= 50; ++i) {
      const double t = i / 50.0;
      const double q = gronwall_quadrature(p, t);
      CHECK(gronwall_integral(p, t).value == Approx(q).epsilon(1e-8));
    }
  }
}

TEST_CASE("continuity at the regime boundary") {
  const double S = 1.0;
  const double below = gronwall_integral(theta_profile(1.0 - 1e-9, S), 1.0).value;
  const double at = gronwall_integral(theta_profile(1.0, S), 1.0).value;
  CHECK(std::abs(below - at) < 1e-6);
}

TEST_CASE("verify ensemble") {
  const auto p = theta_profile(2.0, kInf);
  auto r = verify_ensemble({0.3, 0.5, 0.52}, p);
  CHECK(r.passed);
  CHECK(r.max_ratio == Approx(0.52 / 0.5));
  r = verify_ensemble({0.3, 0.6}, p);
  CHECK_FALSE(r.passed);
  CHECK(r.violations == 1);
}

TEST_CASE("profile for catalog targets") {
  CHECK(profile_for(make_truncated_gaussian(2.0)).constant_sq == Approx(1.0 / 1.5));
  MixtureSpec s;
  s.atoms = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  s.weights = {0.5, 0.5};
  CHECK(profile_for(make_gaussian_mixture(s)).constant_sq == Approx(mixture_constant(1.0)));
}
