#pragma once

#include "bmt/measures.hpp"

#include <vector>

namespace bmt {

enum class Regime { kappaS2_ge_1, kappaS2_lt_1, mixture, trivial };

const char* to_string(Regime r);

/// Envelope theta_t >= lambda_max(grad v(t, .)) and the contraction constant
/// it implies.
struct BoundProfile {
  Regime regime = Regime::trivial;
  double kappa = 0.0;
  double S = kInf;
  double R = 0.0;
  double switch_time = std::numeric_limits<double>::quiet_NaN();  // t*, kappaS2_lt_1 only
  /// Bound on |DX_1|^2 as stated by the contraction theorem.
  double constant_sq = kInf;
  /// int_0^1 exp(2 int_s^1 theta) ds from the closed form; equals constant_sq
  /// except in the kappaS2_lt_1 regime (see README).
  double gronwall_constant_sq = kInf;

  double theta(double t) const;
  bool trivial() const { return regime == Regime::trivial; }
};

/// theta profile for a kappa-log-concave target with support diameter S
/// (S = inf allowed). kappa <= 0 with S = inf yields the trivial regime.
BoundProfile theta_profile(double kappa, double S);
BoundProfile mixture_profile(double R);
BoundProfile profile_for(const TargetMeasure& m);

struct GronwallValue {
  double value = 0.0;
  bool closed_form = true;  // false when t < t* forced the quadrature fallback
};

/// int_0^t exp(2 int_s^t theta_r dr) ds.
GronwallValue gronwall_integral(const BoundProfile& p, double t);
/// Same integral by nested adaptive quadrature.
double gronwall_quadrature(const BoundProfile& p, double t);

/// (e^{2R^2} - 1)/(2R^2), with limit 1 for R < 1e-8.
double mixture_constant(double R);
/// lambda_min lambda_max/(2R^2) (e^{2R^2/lambda_min} - 1) for the mixture
/// gamma_Sigma * nu; isotropic limit when R < 1e-8.
double rescaled_constant(double R, double lambda_min, double lambda_max);
double rescaled_constant(double R, const Mat& Sigma);

struct VerifyReport {
  std::size_t n = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
  double constant_sq = 0.0;
  bool passed = false;
};

/// Compares |DX_1|^2 per path against constant_sq * (1 + slack).
VerifyReport verify_ensemble(const std::vector<double>& norms_sq, const BoundProfile& p, double slack = 0.05);

}  // namespace bmt
