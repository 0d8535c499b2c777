#include "doctest.h"

#include "bmt/malliavin.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

namespace {
auto grid(double rho = 0.9) { return std::make_shared<const TimeGrid>(TimeGrid::geometric(rho, 1e-4)); }
}  // namespace

TEST_CASE("identity target has unit Malliavin norm") {
  const auto n = malliavin_norms_sq(make_standard_gaussian(1), grid(), 100, 1);
  for (double v : n) CHECK(std::abs(std::sqrt(v) - 1.0) < 1e-12);
}

TEST_CASE("gaussian target: |DX_1|^2 equals the variance") {
  const double var = 0.5;
  const auto n = malliavin_norms_sq(make_gaussian(Vec::Zero(1), Mat::Constant(1, 1, var)), grid(0.98), 20, 2);
  for (double v : n) CHECK(v == Approx(var).epsilon(2e-3));
}

TEST_CASE("propagator cocycle") {
  auto m = make_truncated_gaussian(1.0);
  const auto tr = simulate_path(m, grid(), 17);
  const auto flow = jacobian_flow(m, tr);
  REQUIRE_FALSE(flow.failed);
  const Mat a = flow.propagator(10, 60);
  const Mat b = flow.propagator(30, 60) * flow.propagator(10, 30);
  CHECK((a - b).norm() < 1e-13);
  CHECK(flow.propagator(5, 5).isIdentity());
  // Gram recursion against the explicit sum over steps: the later propagator
  // squared times int_0^dt a^{2u/dt} du
  const int k = 40;
  double g = 0.0;
  for (int j = 0; j < k; ++j) {
    const double a = flow.factors[j](0, 0), dt = tr.grid->dt(j);
    const double within = (a * a - 1.0) * dt / (2.0 * std::log(a));
    g += std::pow(flow.propagator(j + 1, k)(0, 0), 2) * within;
  }
  CHECK(flow.gram[k](0, 0) == Approx(g).epsilon(1e-12));
}

TEST_CASE("matrix flow in two dimensions") {
  Mat cov(2, 2);
  cov << 0.6, 0.2, 0.2, 0.4;
  auto m = make_gaussian(Vec::Zero(2), cov);
  const auto n = malliavin_norms_sq(m, grid(0.98), 5, 3);
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  for (double v : n) CHECK(v == Approx(es.eigenvalues().maxCoeff()).epsilon(3e-3));
}

TEST_CASE("moment estimate skips failed paths") {
  std::vector<double> v = {1.0, 4.0, std::nan("")};
  const auto est = moment_estimate(v, 2);
  CHECK(est.n == 2);
  CHECK(est.mean == Approx(8.5));
}

TEST_CASE("norms are reproducible across worker counts") {
  auto m = make_uniform_interval(1.0);
  const auto a = malliavin_norms_sq(m, grid(), 32, 5, 1);
  const auto b = malliavin_norms_sq(m, grid(), 32, 5, 4);
  CHECK(a == b);
}
