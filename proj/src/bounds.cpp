#include "bmt/bounds.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace bmt {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::kappaS2_ge_1: return "kappaS2_ge_1";
    case Regime::kappaS2_lt_1: return "kappaS2_lt_1";
    case Regime::mixture: return "mixture";
    case Regime::trivial: return "trivial";
  }
  return "unknown";
}

double BoundProfile::theta(double t) const {
  switch (regime) {
    case Regime::kappaS2_ge_1: return (1.0 - kappa) / ((1.0 - kappa) * t + kappa);
    case Regime::kappaS2_lt_1:
      if (t <= switch_time) return (t + S * S - 1.0) / ((1.0 - t) * (1.0 - t));
      return (1.0 - kappa) / ((1.0 - kappa) * t + kappa);
    case Regime::mixture: return R * R;
    case Regime::trivial: return kInf;
  }
  return kInf;
}

BoundProfile theta_profile(double kappa, double S) {
  if (std::isnan(kappa) || std::isnan(S) || !(S > 0.0)) throw InvalidInput("theta_profile: need S > 0");
  BoundProfile p;
  p.kappa = kappa;
  p.S = S;
  const bool finite_s = std::isfinite(S);
  if (kappa <= 0.0 && !finite_s) {
    p.regime = Regime::trivial;
    return p;
  }
  const double ks2 = finite_s ? kappa * S * S : kInf;
  if (kappa > 0.0 && ks2 >= 1.0) {
    p.regime = Regime::kappaS2_ge_1;
    p.constant_sq = p.gronwall_constant_sq = 1.0 / kappa;
    return p;
  }
  p.regime = Regime::kappaS2_lt_1;
  const double s2 = S * S;
  p.switch_time = (1.0 - ks2) / ((1.0 - kappa) * s2 + 1.0);
  p.constant_sq = 0.5 * (std::exp(1.0 - ks2) + 1.0) * s2;
  p.gronwall_constant_sq = 0.5 * (std::exp(2.0 * (1.0 - ks2)) + 1.0) * s2;
  return p;
}

BoundProfile mixture_profile(double R) {
  if (!(R >= 0.0) || !std::isfinite(R)) throw InvalidInput("mixture_profile: R must be finite and >= 0");
  BoundProfile p;
  p.regime = Regime::mixture;
  p.R = R;
  p.constant_sq = p.gronwall_constant_sq = mixture_constant(R);
  return p;
}

BoundProfile profile_for(const TargetMeasure& m) {
  if (auto r = m.mixture_radius()) return mixture_profile(*r);
  return theta_profile(m.kappa(), m.diam());
}

GronwallValue gronwall_integral(const BoundProfile& p, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("gronwall_integral: t outside [0,1]");
  const double k = p.kappa;
  switch (p.regime) {
    case Regime::trivial: return {kInf, true};
    case Regime::mixture: {
      const double r2 = p.R * p.R;
      if (r2 * t < 1e-8) return {t * (1.0 + r2 * t), true};
      return {std::expm1(2.0 * r2 * t) / (2.0 * r2), true};
    }
    case Regime::kappaS2_ge_1: return {t * ((1.0 - k) * t + k) / k, true};
    case Regime::kappaS2_lt_1: {
      if (t < p.switch_time) return {gronwall_quadrature(p, t), false};
      const double s2 = p.S * p.S;
      const double a = (1.0 - k) * s2 * t + k * s2;
      return {a * a * std::expm1(2.0 * (1.0 - k * s2)) / (2.0 * s2) +
                  ((1.0 - k) * t + k) * (k * s2 + t + (1.0 - k) * t * s2 - 1.0),
              true};
    }
  }
  return {kInf, true};
}

double gronwall_quadrature(const BoundProfile& p, double t) {
  using boost::math::quadrature::gauss_kronrod;
  if (p.trivial()) return kInf;
  auto th = [&](double r) { return p.theta(r); };
  auto inner = [&](double a, double b) {
    if (b <= a) return 0.0;
    if (p.regime == Regime::kappaS2_lt_1 && a < p.switch_time && p.switch_time < b)
      return gauss_kronrod<double, 61>::integrate(th, a, p.switch_time, 8, 1e-12) +
             gauss_kronrod<double, 61>::integrate(th, p.switch_time, b, 8, 1e-12);
    return gauss_kronrod<double, 61>::integrate(th, a, b, 8, 1e-12);
  };
  auto outer = [&](double s) { return std::exp(2.0 * inner(s, t)); };
  if (p.regime == Regime::kappaS2_lt_1 && p.switch_time > 0.0 && p.switch_time < t)
    return gauss_kronrod<double, 61>::integrate(outer, 0.0, p.switch_time, 10, 1e-11) +
           gauss_kronrod<double, 61>::integrate(outer, p.switch_time, t, 10, 1e-11);
  return gauss_kronrod<double, 61>::integrate(outer, 0.0, t, 10, 1e-11);
}

double mixture_constant(double R) {
  if (!(R >= 0.0)) throw InvalidInput("mixture_constant: R must be >= 0");
  if (R < 1e-8) return 1.0;
  const double r2 = R * R;
  return std::expm1(2.0 * r2) / (2.0 * r2);
}

double rescaled_constant(double R, double lambda_min, double lambda_max) {
  if (!(lambda_min > 0.0) || lambda_max < lambda_min) throw InvalidInput("rescaled_constant: bad spectrum");
  if (R < 1e-8) return lambda_max;
  const double r2 = R * R;
  return lambda_min * lambda_max / (2.0 * r2) * std::expm1(2.0 * r2 / lambda_min);
}

double rescaled_constant(double R, const Mat& Sigma) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Sigma);
  if (es.eigenvalues().minCoeff() <= 0.0) throw InvalidInput("rescaled_constant: Sigma is not SPD");
  return rescaled_constant(R, es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
}

VerifyReport verify_ensemble(const std::vector<double>& norms_sq, const BoundProfile& p, double slack) {
  VerifyReport r;
  r.constant_sq = p.constant_sq;
  for (double v : norms_sq) {
    if (!std::isfinite(v)) continue;
    ++r.n;
    const double ratio = v / p.constant_sq;
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (ratio > 1.0 + slack) ++r.violations;
  }
  r.passed = r.n > 0 && r.violations == 0;
  return r;
}

}  // namespace bmt
