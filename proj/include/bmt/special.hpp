#pragma once

#include <span>
#include <utility>
#include <vector>

namespace bmt {

double normal_pdf(double x);
double normal_log_pdf(double x);
double normal_cdf(double x);
double normal_sf(double x);        // 1 - Phi(x), accurate in the upper tail
double normal_log_sf(double x);    // log(1 - Phi(x)) for all finite x
double normal_log_cdf(double x);
double normal_quantile(double p);  // Phi^{-1}(p)
double normal_sf_inverse(double p);

/// Inverse Mills ratio m(x) = phi(-x)/Phi(-x) = phi(x)/(1 - Phi(x)).
double mills(double x);
/// m(x) - x, the gap to the asymptote; evaluated by continued fraction for
/// x >= 8.
double mills_gap(double x);
/// m'(x) = m(x)^2 - x m(x) = m(x) (m(x) - x).
double mills_prime(double x);
/// 1 - m'(x), the variance factor of a one-sided truncated normal.
double one_minus_mills_prime(double x);

/// Moments of N(mu, var) truncated to [lower, infinity).
struct TruncatedMoments {
  double mean;
  double var;
};
TruncatedMoments truncated_normal_lower(double mu, double var, double lower);

/// Draw from the standard normal truncated to [alpha, infinity) by inverting
/// the survival function at sf(z) * sf(alpha); monotone in z.
double truncated_standard_normal_from(double alpha, double z);

/// Gauss-Legendre nodes/weights on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const Rule& gauss_legendre(int n);
/// Probabilists' Gauss-Hermite rule (weight e^{-x^2/2}/sqrt(2 pi), sums to 1).
const Rule& gauss_hermite(int n);

}  // namespace bmt
