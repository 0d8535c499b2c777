#include "bmt/special.hpp"

#include "bmt/core.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace bmt {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kMillsSwitch = 8.0;

// E_j = x + j / E_{j+1}; returns (E_2, E_3).
std::pair<double, double> mills_fraction(double x) {
  constexpr int depth = 200;
  double e = x;
  for (int j = depth; j >= 3; --j) e = x + j / e;
  const double e3 = e;
  const double e2 = x + 2.0 / e3;
  return {e2, e3};
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double normal_log_pdf(double x) { return -0.5 * x * x - 0.5 * kLogTwoPi; }
double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double normal_log_sf(double x) {
  if (x < 30.0) return std::log(normal_sf(x));
  return normal_log_pdf(x) - std::log(mills(x));
}

double normal_log_cdf(double x) { return normal_log_sf(-x); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p outside (0,1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double normal_sf_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_sf_inverse: p outside (0,1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double mills(double x) {
  if (x >= kMillsSwitch) return x + mills_gap(x);
  if (x < -37.0) return normal_pdf(x);  // the denominator is 1 to double precision
  return normal_pdf(x) / normal_sf(x);
}

double mills_gap(double x) {
  if (x >= kMillsSwitch) return 1.0 / mills_fraction(x).first;
  return mills(x) - x;
}

double mills_prime(double x) {
  if (x >= kMillsSwitch) {
    const double g = mills_gap(x);
    return (x + g) * g;
  }
  const double m = mills(x);
  return m * (m - x);
}

double one_minus_mills_prime(double x) {
  if (x >= kMillsSwitch) {
    auto [e2, e3] = mills_fraction(x);
    return (1.0 / e2) * (2.0 / e3 - 1.0 / e2);
  }
  return 1.0 - mills_prime(x);
}

TruncatedMoments truncated_normal_lower(double mu, double var, double lower) {
  const double sd = std::sqrt(var);
  const double alpha = (lower - mu) / sd;
  return {mu + sd * mills(alpha), var * one_minus_mills_prime(alpha)};
}

double truncated_standard_normal_from(double alpha, double z) {
  const double log_p = normal_log_sf(z) + normal_log_sf(alpha);
  if (log_p > -700.0) {
    const double p = std::exp(log_p);
    if (p < 1.0) return std::max(alpha, normal_sf_inverse(p));
  }
  // Far upper tail: Rayleigh-type inversion of exp(-(y^2 - alpha^2)/2).
  return std::sqrt(alpha * alpha - 2.0 * normal_log_sf(z));
}

const Rule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (slot) return *slot;
  auto rule = std::make_unique<Rule>();
  rule->nodes.resize(n);
  rule->weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule->nodes[i] = -x;
    rule->nodes[n - 1 - i] = x;
    rule->weights[i] = w;
    rule->weights[n - 1 - i] = w;
  }
  slot = std::move(rule);
  return *slot;
}

const Rule& gauss_hermite(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (slot) return *slot;
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
  // polynomials: off-diagonal sqrt(k).
  Mat jac = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Mat> es(jac);
  auto rule = std::make_unique<Rule>();
  rule->nodes.resize(n);
  rule->weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule->nodes[i] = es.eigenvalues()[i];
    const double v = es.eigenvectors()(0, i);
    rule->weights[i] = v * v;
  }
  // Symmetrize to remove eigen-solver noise.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule->nodes[n - 1 - i] - rule->nodes[i]);
    const double w = 0.5 * (rule->weights[i] + rule->weights[n - 1 - i]);
    rule->nodes[i] = -x;
    rule->nodes[n - 1 - i] = x;
    rule->weights[i] = rule->weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule->nodes[n / 2] = 0.0;
  slot = std::move(rule);
  return *slot;
}

}  // namespace bmt
