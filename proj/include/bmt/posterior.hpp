#pragma once

#include "bmt/measures.hpp"

namespace bmt {

/// Moments of p^{x,1-t}. Closed form when the target has one, tensor
/// Gauss-Hermite for d <= 3 (when node doubling converges), importance sampling
/// from phi^{x,1-t} otherwise.
PosteriorMoments posterior_moments(const TargetMeasure& m, double t, const Vec& x);

/// v(t,x) = (mean(p^{x,1-t}) - x)/(1-t).
Vec drift(const TargetMeasure& m, double t, const Vec& x);

/// grad v(t,x) = Cov(p^{x,1-t})/(1-t)^2 - Id/(1-t).
Mat drift_jacobian(const TargetMeasure& m, double t, const Vec& x);

/// P_t f(x) for the heat semigroup at time t (not 1-t).
double heat_semigroup(const TargetMeasure& m, double t, const Vec& x);
double log_heat_semigroup(const TargetMeasure& m, double t, const Vec& x);

/// Quadrature and sampling fallbacks, exposed for cross-checks.
PosteriorMoments gauss_hermite_posterior(const TargetMeasure& m, double s, const Vec& x, int nodes = 64);
PosteriorMoments monte_carlo_posterior(const TargetMeasure& m, double s, const Vec& x, int samples = 1 << 14);

}  // namespace bmt
