#include "bmt/posterior.hpp"

#include "bmt/special.hpp"

#include <cmath>
#include <cstring>

namespace bmt {

namespace {

constexpr double kDegenerateLogMass = -700.0;

void check_time(double t) {
  if (!(t >= 0.0)) throw DomainError("posterior: t must be >= 0");
  if (!(t < 1.0)) throw DomainError("posterior: t must be < 1");
}

void finish(PosteriorMoments& pm, double s, const Vec& x) {
  const int d = static_cast<int>(x.size());
  pm.cov = 0.5 * (pm.cov + pm.cov.transpose());
  pm.drift = (pm.mean - x) / s;
  pm.drift_jacobian = pm.cov / (s * s) - Mat::Identity(d, d) / s;
}

// Weighted moments of samples y_i with log-weights lw_i.
PosteriorMoments weighted_moments(const std::vector<Vec>& ys, const std::vector<double>& lw, double log_norm) {
  double mx = -kInf;
  for (double v : lw) mx = std::max(mx, v);
  const int d = static_cast<int>(ys.front().size());
  PosteriorMoments pm;
  if (!std::isfinite(mx)) {
    pm.log_mass = -kInf;
    return pm;
  }
  double z = 0.0;
  Vec mean = Vec::Zero(d);
  std::vector<double> w(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) {
    w[i] = std::exp(lw[i] - mx);
    z += w[i];
    mean += w[i] * ys[i];
  }
  mean /= z;
  Mat cov = Mat::Zero(d, d);
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const Vec r = ys[i] - mean;
    cov += w[i] * r * r.transpose();
  }
  pm.mean = mean;
  pm.cov = cov / z;
  pm.log_mass = mx + std::log(z) + log_norm;
  return pm;
}

PosteriorMoments gh_once(const TargetMeasure& m, double s, const Vec& x, int n) {
  const int d = m.dim();
  const Rule& rule = gauss_hermite(n);
  const double sd = std::sqrt(s);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
  std::vector<Vec> ys;
  std::vector<double> lw;
  ys.reserve(total);
  lw.reserve(total);
  std::vector<int> idx(d, 0);
  for (std::size_t k = 0; k < total; ++k) {
    Vec y(d);
    double logw = 0.0;
    for (int i = 0; i < d; ++i) {
      y[i] = x[i] + sd * rule.nodes[idx[i]];
      logw += std::log(rule.weights[idx[i]]);
    }
    lw.push_back(logw + m.log_f(y));
    ys.push_back(std::move(y));
    for (int i = 0; i < d; ++i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
  }
  return weighted_moments(ys, lw, 0.0);
}

}  // namespace

namespace {

// Node doubling until mean and covariance settle; `converged` is false when
// the budget ran out first (integrand growing faster than the weight).
PosteriorMoments gauss_hermite_doubling(const TargetMeasure& m, double s, const Vec& x, int nodes, bool& converged) {
  const int d = m.dim();
  if (d > 3) throw InvalidInput("gauss_hermite_posterior: d > 3");
  const std::size_t budget = std::size_t{1} << 21;
  PosteriorMoments prev = gh_once(m, s, x, nodes);
  converged = false;
  for (int n = 2 * nodes;; n *= 2) {
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
    if (total > budget || n > 1024) break;
    PosteriorMoments next = gh_once(m, s, x, n);
    const double change = std::max((next.mean - prev.mean).cwiseAbs().maxCoeff(),
                                   (next.cov - prev.cov).cwiseAbs().maxCoeff());
    prev = std::move(next);
    if (change < 1e-10) {
      converged = true;
      break;
    }
  }
  prev.method = PosteriorMethod::gauss_hermite;
  if (std::isfinite(prev.log_mass)) finish(prev, s, x);
  return prev;
}

}  // namespace

PosteriorMoments gauss_hermite_posterior(const TargetMeasure& m, double s, const Vec& x, int nodes) {
  bool converged = false;
  return gauss_hermite_doubling(m, s, x, nodes, converged);
}

PosteriorMoments monte_carlo_posterior(const TargetMeasure& m, double s, const Vec& x, int samples) {
  const int d = m.dim();
  // Deterministic stream keyed by (s, x) keeps the evaluation a pure function.
  std::uint64_t key = 0;
  auto mix = [&](double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, sizeof b);
    key = splitmix64(key ^ b);
  };
  mix(s);
  for (int i = 0; i < d; ++i) mix(x[i]);
  double inflate = 1.0;
  PosteriorMoments pm;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Rng rng(derive_seed(key, {static_cast<std::uint64_t>(attempt)}));
    const double sd = std::sqrt(s * inflate);
    std::vector<Vec> ys(samples);
    std::vector<double> lw(samples);
    for (int k = 0; k < samples; ++k) {
      const Vec z = rng.normal_vector(d);
      ys[k] = x + sd * z;
      // Proposal N(x, inflate*s); target f * phi^{x,s}.
      const double log_ratio = 0.5 * z.squaredNorm() * (1.0 - inflate) - 0.5 * d * std::log(1.0 / inflate);
      lw[k] = m.log_f(ys[k]) + log_ratio;
    }
    pm = weighted_moments(ys, lw, -std::log(static_cast<double>(samples)));
    double mx = -kInf;
    for (double v : lw) mx = std::max(mx, v);
    double s1 = 0.0, s2 = 0.0;
    for (double v : lw) {
      const double w = std::exp(v - mx);
      s1 += w;
      s2 += w * w;
    }
    const double ess = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
    if (ess >= 1000.0) break;
    inflate *= 2.0;
  }
  pm.method = PosteriorMethod::monte_carlo;
  if (std::isfinite(pm.log_mass)) finish(pm, s, x);
  return pm;
}

PosteriorMoments posterior_moments(const TargetMeasure& m, double t, const Vec& x) {
  check_time(t);
  if (x.size() != m.dim()) throw InvalidInput("posterior: dimension mismatch");
  if (!x.allFinite()) throw InvalidInput("posterior: non-finite state");
  const double s = 1.0 - t;
  std::optional<PosteriorMoments> pm = m.model().closed_form_posterior(s, x);
  if (!pm && m.dim() <= 3) {
    bool converged = false;
    pm = gauss_hermite_doubling(m, s, x, 64, converged);
    if (!converged || !pm->mean.allFinite()) pm.reset();
  }
  if (!pm) pm = monte_carlo_posterior(m, s, x);
  if (!(pm->log_mass > kDegenerateLogMass)) throw PosteriorDegenerate("posterior mass underflow");
  return *pm;
}

Vec drift(const TargetMeasure& m, double t, const Vec& x) { return posterior_moments(m, t, x).drift; }

Mat drift_jacobian(const TargetMeasure& m, double t, const Vec& x) {
  return posterior_moments(m, t, x).drift_jacobian;
}

double log_heat_semigroup(const TargetMeasure& m, double t, const Vec& x) {
  if (t == 0.0) return m.log_f(x);
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("heat_semigroup: t outside [0,1]");
  return posterior_moments(m, 1.0 - t, x).log_mass;
}

double heat_semigroup(const TargetMeasure& m, double t, const Vec& x) {
  const double lm = log_heat_semigroup(m, t, x);
  if (!(lm > kDegenerateLogMass) && t > 0.0) throw PosteriorDegenerate("heat semigroup underflow");
  return std::exp(lm);
}

}  // namespace bmt
