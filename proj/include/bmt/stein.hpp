#pragma once

#include "bmt/follmer.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bmt {

/// Scalar statistic chi : R^d -> R with gradient.
struct SteinFunction {
  std::string label;
  std::function<double(const Vec&)> chi;
  std::function<Vec(const Vec&)> grad;
};

SteinFunction identity_statistic();                      // chi(x) = x (d = 1)
SteinFunction centered_statistic(double mean);           // chi(x) = x - mean
SteinFunction chi_square_statistic();                    // chi(x) = x^2 - 1

struct SteinOptions {
  std::size_t n_outer = 5000;
  int n_inner = 4;
  int s_nodes = 16;
  int bins = 25;
  std::size_t min_count = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  std::shared_ptr<const TimeGrid> grid;
};

/// Quantile-binned estimate of tau(x) = E[(DF, -DL^{-1}F)_H | F = x].
struct SteinKernelEstimate {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> bin_center;   // mean of F in the bin
  std::vector<double> tau;
  std::vector<double> tau_sd;       // standard error of the bin mean
  std::vector<std::size_t> counts;
  double discrepancy_sq = 0.0;
  double tau_sq_mean = 0.0;         // E|tau|^2 over bins
  double chi_mean = 0.0;            // subtracted from F
  std::vector<double> F;            // centered statistic per outer path
  std::vector<double> tau_path;     // (DF, -DL^{-1}F)_H per outer path
  std::size_t inner_failures = 0;
  std::size_t inner_total = 0;

  /// Piecewise-constant kernel; values outside the bins use the end bins.
  double operator()(double x) const;
};

/// Nodes u_i in (0,1) and weights for int_0^inf e^{-s} g(s) ds = int_0^1 g(-log(1-u)) du.
std::pair<std::vector<double>, std::vector<double>> mehler_grid(int n);

SteinKernelEstimate stein_kernel_estimate(const TargetMeasure& m, const SteinFunction& chi,
                                          const SteinOptions& opts);

/// Rebins the per-path values with a different bin count.
SteinKernelEstimate rebin(const SteinKernelEstimate& e, int bins, std::size_t min_count);

/// Occupancy-weighted sum of (tau_bin - 1)^2.
double stein_discrepancy(const SteinKernelEstimate& e);

struct SteinIdentityRow {
  std::string label;
  double residual = 0.0;
  double sd = 0.0;
  double bin_allowance = 0.0;  // change under halving the bin count
  bool passed = false;
};

/// |E[eta(Y) Y] - E[eta'(Y) tau(Y)]| on fresh samples Y of chi_* p.
std::vector<SteinIdentityRow> stein_identity_check(const SteinKernelEstimate& e, const std::vector<double>& samples,
                                                   int n_boot, std::uint64_t seed);

/// W_2^2 between a 1D law with quantile function `q` and gamma_1.
double w2_squared_quantile(const std::function<double(double)>& q);
/// W_2^2 between the empirical law of `x` and gamma_1 (quantile coupling).
double w2_squared_empirical(std::vector<double> x);

struct CltRow {
  int n = 0;
  double w2_sq = 0.0;
  double bound = 0.0;
  double scaled = 0.0;  // n * w2_sq
  bool bound_holds = false;
};

struct CltReport {
  std::vector<CltRow> rows;
  double resolution = 0.0;  // empirical W2^2 of an exact Gaussian sample of the same size
  double ratio = 0.0;       // max/min of n * w2_sq
  bool bound_holds = false;
};

/// Standardized sums of n iid draws of the whitened statistic, n_mc per n.
CltReport clt_rate_check(const std::function<double(Rng&)>& draw, const std::vector<int>& n_list, std::size_t n_mc,
                         double tau_sq_mean, std::uint64_t seed);

}  // namespace bmt
