#include "doctest.h"

#include "bmt/inequalities.hpp"

#include <cmath>

using namespace bmt;
using doctest::Approx;

namespace {
std::vector<Vec> samples(const TargetMeasure& m, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> s(n);
  for (auto& v : s) v = m.sample(rng);
  return s;
}
}  // namespace

TEST_CASE("admissible divergences") {
  CHECK(divergence_is_admissible(psi_square()));
  CHECK(divergence_is_admissible(psi_entropy()));
  Divergence cube{"x^3", [](double x) { return x * x * x; }, [](double x) { return 6 * x; }, 0.0, kInf};
  CHECK_FALSE(divergence_is_admissible(cube));
}

TEST_CASE("gaussian Poincare equality for linear functions") {
  const auto s = samples(make_standard_gaussian(1), 20000, 3);
  const auto rep = q_poincare_check(s, default_family(1), 2, 1.0, 100, 4);
  CHECK(rep.passed());
  const auto& lin = rep.rows.front();
  CHECK(lin.function_label == "linear");
  CHECK(std::abs(lin.margin) < 3.0 * lin.sd);
  CHECK_THROWS_AS(q_poincare_check(s, default_family(1), 3, 1.0, 10, 1), InvalidInput);
}

TEST_CASE("log-Sobolev on the truncated gaussian") {
  auto m = make_truncated_gaussian(1.0);
  const auto s = samples(m, 20000, 5);
  CHECK(psi_sobolev_check(s, positive_family(1), psi_entropy(), 0.5, 100, 6).passed());
  CHECK(psi_sobolev_check(s, default_family(1), psi_square(), 0.5, 100, 7).passed());
}

TEST_CASE("entropy rows skip functions leaving the domain") {
  const auto s = samples(make_standard_gaussian(1), 1000, 8);
  const auto rep = psi_sobolev_check(s, default_family(1), psi_entropy(), 1.0, 20, 9);
  bool skipped = false;
  for (const auto& r : rep.rows) skipped = skipped || r.skipped;
  CHECK(skipped);
}

TEST_CASE("gaussian isoperimetry is sharp") {
  const auto rep = isoperimetric_check_1d(make_standard_gaussian(1), {0.1, 0.5, 0.9}, {0.5, 1.0}, 1.0);
  CHECK(rep.passed());
  for (const auto& r : rep.rows) CHECK(r.mass == Approx(r.conventional).epsilon(1e-12));
}
