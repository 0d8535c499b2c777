#pragma once

#include "bmt/follmer.hpp"

namespace bmt {

/// Jacobian flow J(t_j, t_k) along one path, stored as per-step factors
/// A_k = exp(M_k dt_k) with M_k the drift Jacobian at the step midpoint, and
/// the Gram operator G_{t_k} = sum_{j<k} J(t_j,t_k) J(t_j,t_k)^T dt_j.
struct JacobianFlow {
  std::shared_ptr<const TimeGrid> grid;
  std::vector<Mat> factors;  // K entries
  std::vector<Mat> gram;     // K+1 entries, gram[0] = 0
  std::vector<double> mid_times;
  std::vector<double> mid_lambda_max;  // lambda_max of M_k (the largest over bisected sub-steps)
  bool failed = false;
  std::string failure;

  /// J(t_j, t_k) = A_{k-1} ... A_j, identity for j == k.
  Mat propagator(int j, int k) const;
};

JacobianFlow jacobian_flow(const TargetMeasure& m, const Trajectory& path);

/// |DX_{t_k}| = sqrt(lambda_max(G_{t_k})).
double malliavin_norm(const JacobianFlow& flow, int k);
/// |DX_1|: the final sliver [t_K, 1] enters the Gram operator with J = Id,
/// i.e. sqrt(lambda_max(G_{t_K} + eps_end Id)).
double malliavin_norm_endpoint(const JacobianFlow& flow);

/// Path simulation plus flow; returns |DX_1|^2 per path (NaN for failures).
std::vector<double> malliavin_norms_sq(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid,
                                       std::size_t n_paths, std::uint64_t master_seed, int workers = 1);

/// Monte Carlo mean of |DX_1|^{2m} with its standard error, skipping NaNs.
MeanEstimate moment_estimate(const std::vector<double>& norms_sq, int m);

}  // namespace bmt
