#include "doctest.h"

#include "bmt/special.hpp"
#include "bmt/stein.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

TEST_CASE("mehler grid integrates e^{-s}") {
  const auto [u, w] = mehler_grid(16);
  double total = 0.0, first = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    total += w[i];
    first += w[i] * -std::log(1.0 - u[i]);  // int s e^{-s} ds = 1
  }
  CHECK(total == Approx(1.0).epsilon(1e-14));
  CHECK(first == Approx(1.0).epsilon(5e-3));  // log singularity at u = 1
}

TEST_CASE("W2 to the gaussian") {
  CHECK(w2_squared_quantile([](double u) { return normal_quantile(u); }) < 1e-14);
  CHECK(w2_squared_quantile([](double u) { return std::sqrt(3.0) * (2 * u - 1); }) ==
        Approx(0.045589952388320314).epsilon(1e-8));
  std::vector<double> q;
  for (int i = 0; i < 1000; ++i) q.push_back(normal_quantile((i + 0.5) / 1000));
  CHECK(w2_squared_empirical(q) < 1e-20);
}

TEST_CASE("gaussian stein kernel is one") {
  SteinOptions o;
  o.n_outer = 1000;
  o.n_inner = 1;
  o.s_nodes = 4;
  o.bins = 5;
  o.grid = std::make_shared<const TimeGrid>(TimeGrid::geometric(0.8, 1e-3));
  const auto e = stein_kernel_estimate(make_standard_gaussian(1), identity_statistic(), o);
  for (double t : e.tau) CHECK(t == Approx(1.0).epsilon(1e-12));
  CHECK(e.discrepancy_sq < 1e-20);
  CHECK(e.counts.size() == 5);
}

TEST_CASE("kernel mean matches the variance of the simulated law") {
  // E tau(F) = Var F holds for the discretized map too, so a coarse grid makes
  // this a sharp test of the path derivative.
  SteinOptions o;
  o.n_outer = 1500;
  o.n_inner = 2;
  o.s_nodes = 8;
  o.bins = 5;
  o.grid = std::make_shared<const TimeGrid>(TimeGrid::geometric(0.8, 1e-3));
  const auto e = stein_kernel_estimate(make_truncated_gaussian(1.0), centered_statistic(0.0), o);
  std::vector<double> diff;
  for (std::size_t i = 0; i < e.F.size(); ++i)
    if (std::isfinite(e.tau_path[i])) diff.push_back(e.tau_path[i] - e.F[i] * e.F[i]);
  const auto est = mean_estimate(diff);
  CHECK(std::abs(est.mean) < 4.0 * est.std_error);
}

TEST_CASE("stein identity on gaussian samples with tau = 1") {
  SteinKernelEstimate e;
  e.bin_lo = {-kInf};
  e.bin_hi = {kInf};
  e.tau = {1.0};
  e.tau_sd = {0.0};
  e.counts = {1};
  Rng rng(3);
  std::vector<double> y(20000);
  for (auto& v : y) v = rng.normal();
  for (const auto& row : stein_identity_check(e, y, 100, 4)) CHECK(row.passed);
}

TEST_CASE("bins respect the occupancy floor") {
  SteinKernelEstimate e;
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    e.F.push_back(rng.normal());
    e.tau_path.push_back(1.0);
  }
  const auto r = rebin(e, 25, 200);
  CHECK(r.tau.size() == 5);
  for (auto c : r.counts) CHECK(c >= 200);
  CHECK(r(-100.0) == 1.0);
}

TEST_CASE("gaussian is a CLT fixed point") {
  const auto rep = clt_rate_check([](Rng& r) { return r.normal(); }, {4, 16}, 20000, 1.0, 9);
  CHECK(rep.bound_holds);
  for (const auto& row : rep.rows) CHECK(row.w2_sq < 5.0 * rep.resolution + 1e-4);
}
