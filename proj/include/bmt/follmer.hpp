#pragma once

#include "bmt/measures.hpp"

#include <memory>
#include <string>
#include <vector>

namespace bmt {

enum class GridKind { uniform, geometric };

/// Nodes 0 = t_0 < ... < t_K = 1 - endpoint_eps.
struct TimeGrid {
  std::vector<double> nodes;
  double endpoint_eps = 1e-4;
  GridKind refinement = GridKind::geometric;

  /// 1 - t_k = r^k with r = eps_end^{1/K}, K = round(log eps_end / log rho).
  static TimeGrid geometric(double rho, double eps_end);
  static TimeGrid uniform(int steps, double eps_end);

  int steps() const { return static_cast<int>(nodes.size()) - 1; }
  double dt(int k) const { return nodes[k + 1] - nodes[k]; }
  void validate() const;
};

/// Driving noise of one path: Brownian increments (d x K, already scaled by
/// sqrt(dt)) and the standard normals used by the endpoint draw.
struct PathNoise {
  Mat increments;
  Vec endpoint_noise;
};

struct Trajectory {
  std::shared_ptr<const TimeGrid> grid;
  Mat states;  // d x (K+1); empty when the ensemble was run without states
  Vec endpoint;
  PathNoise noise;
  std::uint64_t seed = 0;
  bool failed = false;
  double failure_time = 0.0;
  std::string failure;
  /// (1/2) int_0^1 |v(t,X_t)|^2 dt by the trapezoid rule on the grid plus the
  /// final sliver.
  double action = 0.0;
};

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index);

PathNoise draw_noise(const TargetMeasure& m, const TimeGrid& grid, std::uint64_t seed);

/// Euler-Maruyama on the grid, then the endpoint policy: an exact posterior
/// draw from p^{X_{t_K}, eps_end} when the target supports it, otherwise
/// X_1 = X_{t_K} + v(t_K, X_{t_K}) eps_end.
Trajectory simulate_from_noise(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid, PathNoise noise,
                               std::uint64_t seed = 0);
Trajectory simulate_path(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid, std::uint64_t seed);

struct Ensemble {
  std::vector<Trajectory> paths;
  std::size_t failures = 0;

  /// Endpoints of surviving paths, in path order.
  std::vector<Vec> endpoints() const;
  double failure_fraction() const;
};

Ensemble simulate_ensemble(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid, std::size_t n_paths,
                           std::uint64_t master_seed, int workers = 1, bool keep_states = true);

/// Kolmogorov-Smirnov distance between a sample and a CDF.
double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf);

struct EndpointReport {
  std::size_t n = 0;
  double ks = 0.0;          // 1D
  double threshold = 0.0;
  double max_z = 0.0;       // d > 1: largest CLT z-score of mean/second moments
  bool passed = false;
};

/// 1D: KS statistic against the CDF, pass iff ks < threshold.
/// d > 1: first and second moments against sampler moments, pass iff every
/// z-score is below 4.
EndpointReport endpoint_distribution_check(const Ensemble& e, const TargetMeasure& m, double threshold,
                                           std::uint64_t seed = 7);

struct EntropyReport {
  double entropy = 0.0;       // H(p | gamma) by quadrature / closed form
  double path_integral = 0.0;  // (1/2) int E|v|^2
  double std_error = 0.0;
  double relative_error = 0.0;
};

EntropyReport entropy_identity_check(const TargetMeasure& m, const Ensemble& e);

struct LocalizationDiagnostics {
  std::vector<double> times;
  std::vector<Vec> barycenters;
  std::vector<Mat> covariances;
  std::vector<double> gamma_q;
  /// Largest |p_t(y) - p^{X_t,1-t}(y)| over the 1D evaluation grid, relative
  /// to the peak density.
  double density_identity_error = 0.0;
};

LocalizationDiagnostics localization_diagnostics(const TargetMeasure& m, const Trajectory& path, double q,
                                                 int stride = 1);

struct MartingaleReport {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;
  double initial = 0.0;
  double max_z = 0.0;
  bool passed = false;
};

/// E[a_t] against a_0 = mean(p), first coordinate, at every grid node.
MartingaleReport barycenter_martingale_check(const TargetMeasure& m, const Ensemble& e);

}  // namespace bmt
