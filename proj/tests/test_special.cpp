#include "doctest.h"

#include "bmt/core.hpp"
#include "bmt/special.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

TEST_CASE("normal tails") {
  CHECK(normal_cdf(-8.0) == Approx(6.220960574271784e-16).epsilon(1e-12));
  CHECK(normal_sf(8.0) == Approx(6.220960574271784e-16).epsilon(1e-12));
  CHECK(normal_log_sf(40.0) == Approx(-804.6084420137538).epsilon(1e-13));
  CHECK(normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_sf_inverse(normal_sf(9.0)) == Approx(9.0).epsilon(1e-12));
}

TEST_CASE("mills ratio values") {
  CHECK(mills(0.0) == Approx(0.7978845608028654).epsilon(1e-15));
  CHECK(mills(-3.0) == Approx(0.004437839042125664).epsilon(1e-13));
  CHECK(mills(10.0) == Approx(10.098093233962512).epsilon(1e-14));
  CHECK(mills(30.0) == Approx(30.033259667433677).epsilon(1e-14));
  CHECK(mills_prime(0.0) == Approx(2.0 / kPi).epsilon(1e-14));
}

TEST_CASE("mills stability on [-8, 8]") {
  for (int i = -80; i <= 80; ++i) {
    const double x = i / 10.0;
    CHECK(std::abs(mills(x) * normal_sf(x) - normal_pdf(x)) < 1e-14);
  }
  // continued-fraction branch against the direct ratio at the switch
  const double direct = normal_pdf(8.0) / normal_sf(8.0);
  CHECK(std::abs(mills(8.0) - direct) < 1e-12);
  CHECK(std::abs(mills(8.0 - 1e-9) - mills(8.0)) < 1e-8);
}

TEST_CASE("mills derivative matches finite differences") {
  for (double x : {-5.0, -1.0, 0.0, 0.7, 3.0, 12.0}) {
    const double h = 1e-5;
    const double fd = (mills(x + h) - mills(x - h)) / (2 * h);
    CHECK(mills_prime(x) == Approx(fd).epsilon(1e-7));
    CHECK(one_minus_mills_prime(x) == Approx(1.0 - mills_prime(x)).epsilon(1e-9));
  }
  CHECK(one_minus_mills_prime(40.0) > 0.0);
}

TEST_CASE("truncated normal moments") {
  // half normal
  auto m = truncated_normal_lower(0.0, 1.0, 0.0);
  CHECK(m.mean == Approx(std::sqrt(2.0 / kPi)).epsilon(1e-14));
  CHECK(m.var == Approx(1.0 - 2.0 / kPi).epsilon(1e-13));
  const double a = 0.3;
  CHECK(truncated_standard_normal_from(a, -40.0) >= a);
  CHECK(truncated_standard_normal_from(a, 0.1) < truncated_standard_normal_from(a, 0.2));
}

TEST_CASE("quadrature rules") {
  const Rule& gh = gauss_hermite(8);
  double s = 0, m8 = 0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    s += gh.weights[i];
    m8 += gh.weights[i] * std::pow(gh.nodes[i], 8);
  }
  CHECK(s == Approx(1.0).epsilon(1e-14));
  CHECK(m8 == Approx(105.0).epsilon(1e-12));
  const Rule& gl = gauss_legendre(16);
  double i5 = 0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) i5 += gl.weights[i] * std::exp(gl.nodes[i]);
  CHECK(i5 == Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-14));
}
