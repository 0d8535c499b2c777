#pragma once

#include "bmt/measures.hpp"

#include <functional>
#include <vector>

namespace bmt {

/// Root c < 0 of m'(c) = 1/3, by bisection on [-10, 0].
double find_c();

struct MillsData {
  double sigma = 1.0;
  double c_star = 0.0;
  /// sigma_t = sqrt(sigma / ((1-t)(1-t+sigma))).
  double sigma_t(double t) const;
};

MillsData make_mills_data(double sigma);

struct LogPDerivatives {
  double first;
  double second;
};

/// d/dx and d^2/dx^2 of log P_{1-t} f(x) for the truncated Gaussian:
/// sigma_t m(-sigma_t x) - x/(1-t+sigma) and -sigma_t^2 m'(-sigma_t x) - 1/(1-t+sigma).
LogPDerivatives logP_derivatives(double sigma, double t, double x);

/// eta_eps(t) = -c/sigma_t on [eps, 1-eps], linear from 0 on [0, eps].
struct EtaPath {
  MillsData data;
  double eps = 0.0;
  double operator()(double t) const;
};

EtaPath eta_path(const MillsData& data, double eps);

struct SandwichReport {
  std::size_t points = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min over the grid of the distance to the nearer bound
};

/// -(1/2)/(1-t) - 1/(1-t+sigma) <= d^2 log P(t, eta(t)) <= -(1/8)/(1-t) on an
/// n-point grid of [eps, 1-eps].
SandwichReport sandwich_check(const MillsData& data, double eps, std::size_t n_points);

/// L(eps) with L^2 = int_0^{1-eps} (1 + a(t) y(t))^2 dt, where a(t) is the
/// second log-derivative along `path` and y' = 1 + a y, y(0) = 0.
double derivative_norm_lower_bound(const MillsData& data, double eps, const std::function<double(double)>& path);

/// (1/128) log(1/eps) + (1/128) log(1/81) - 1/18.
double log_floor(double eps);

struct EpsilonCurve {
  std::vector<double> eps_values;
  std::vector<double> L_values;
  std::vector<double> log_floor;  // compared against L^2
  double slope = 0.0;               // regression of L^2 on log(1/eps)
  double intercept = 0.0;
};

EpsilonCurve growth_curve(const MillsData& data, const std::vector<double>& eps_list);

/// Smallest eps of the form 10^{-j/4} at which L(eps) exceeds C.
double eps_exceeding(const MillsData& data, double C);

struct TubeReport {
  std::size_t plain_paths = 0;
  std::size_t plain_hits = 0;
  std::size_t guided_paths = 0;
  std::size_t guided_hits = 0;
  double guided_estimate = 0.0;   // importance-sampling estimate of the tube probability
  double guided_std_error = 0.0;
};

/// Probability that a truncated-Gaussian Foellmer path stays within delta of
/// eta_eps on [eps, 1-eps]. Plain simulation plus a Girsanov-reweighted
/// estimate whose proposal is steered toward the tube.
TubeReport tube_hit(const MillsData& data, double eps, double delta, std::size_t n_plain, std::size_t n_guided,
                    std::uint64_t seed, int workers = 1, int steps = 400);

/// Monotone map F_p^{-1} o Phi pushing gamma_1 to p.
class OtMap1D {
 public:
  explicit OtMap1D(TargetMeasure m);
  double operator()(double x) const;
  /// T'(x) = phi(x) / p(T(x)).
  double derivative(double x) const;

 private:
  TargetMeasure m_;
};

OtMap1D ot_map_1d(const TargetMeasure& m);

struct OtContractionReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
  double bound = 0.0;
  std::vector<double> ratios;
};

/// |O(w+h) - O(w)|^2_{H^1} / |h|^2_{H^1} over sampled paths w and unit
/// piecewise-linear directions h, against max{1/kappa, 1}.
OtContractionReport wiener_ot_contraction_check(const TargetMeasure& m, double kappa, std::size_t n_pairs,
                                                std::uint64_t seed, int pieces = 16);

}  // namespace bmt
