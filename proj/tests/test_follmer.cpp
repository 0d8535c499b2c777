#include "doctest.h"

#include "bmt/follmer.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

namespace {
auto grid(double rho = 0.9) { return std::make_shared<const TimeGrid>(TimeGrid::geometric(rho, 1e-4)); }
}  // namespace

TEST_CASE("geometric grid") {
  const auto g = TimeGrid::geometric(0.9, 1e-4);
  CHECK(g.steps() == 87);
  CHECK(g.nodes.front() == 0.0);
  CHECK(g.nodes.back() == Approx(1.0 - 1e-4).epsilon(1e-15));
  CHECK_NOTHROW(g.validate());
  CHECK_THROWS_AS(TimeGrid::geometric(1.2, 1e-4), InvalidInput);
}

TEST_CASE("ensembles do not depend on the worker count") {
  auto m = make_truncated_gaussian(1.0);
  const auto a = simulate_ensemble(m, grid(), 64, 42, 1, true);
  const auto b = simulate_ensemble(m, grid(), 64, 42, 3, true);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(a.paths[i].endpoint[0] == b.paths[i].endpoint[0]);
    CHECK(a.paths[i].action == b.paths[i].action);
  }
  const auto c = simulate_ensemble(m, grid(), 64, 43, 1, false);
  CHECK(a.paths[0].endpoint[0] != c.paths[0].endpoint[0]);
}

TEST_CASE("constant drift for a mean-one gaussian") {
  auto m = make_gaussian(Vec::Constant(1, 1.0), Mat::Identity(1, 1));
  const auto e = simulate_ensemble(m, grid(), 50, 3, 1, false);
  for (const auto& p : e.paths) CHECK(p.action == Approx(0.5).epsilon(1e-12));
  const auto rep = entropy_identity_check(m, e);
  CHECK(rep.entropy == Approx(0.5).epsilon(1e-12));
  CHECK(rep.relative_error < 1e-12);
}

TEST_CASE("identity target") {
  auto m = make_standard_gaussian(2);
  const auto e = simulate_ensemble(m, grid(), 20, 9, 1, true);
  for (const auto& p : e.paths) {
    CHECK(p.action == 0.0);
    // X_1 is the Brownian endpoint
    const Vec sum = p.noise.increments.rowwise().sum();
    CHECK((p.states.col(p.states.cols() - 1) - sum).norm() < 1e-12);
  }
}

TEST_CASE("endpoint law, small ensemble") {
  auto m = make_uniform_interval(1.0);
  const auto e = simulate_ensemble(m, grid(), 4000, 1, 1, false);
  const auto rep = endpoint_distribution_check(e, m, 0.03);
  CHECK(rep.ks < 0.03);
  for (const auto& p : e.paths) {
    CHECK(p.endpoint[0] >= 0.0);
    CHECK(p.endpoint[0] <= 1.0);
  }
}

TEST_CASE("localization density identity and barycenter martingale") {
  auto m = make_truncated_gaussian(2.0);
  const auto e = simulate_ensemble(m, grid(), 2000, 4, 1, true);
  const auto diag = localization_diagnostics(m, e.paths[0], 2.0, 4);
  CHECK(diag.density_identity_error < 1e-8);
  CHECK(diag.times.size() == diag.gamma_q.size());
  const auto mr = barycenter_martingale_check(m, e);
  CHECK(mr.passed);
  CHECK(mr.initial == Approx(std::sqrt(2.0 / kPi) * std::sqrt(2.0 / 3.0)).epsilon(1e-8));
}

TEST_CASE("ks statistic oracle") {
  // uniform grid points have KS distance 1/(2n)
  std::vector<double> x;
  for (int i = 0; i < 100; ++i) x.push_back((i + 0.5) / 100.0);
  CHECK(ks_statistic(x, [](double y) { return y; }) == Approx(0.005).epsilon(1e-12));
}
