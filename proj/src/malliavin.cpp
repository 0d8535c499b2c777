#include "bmt/malliavin.hpp"

#include "bmt/posterior.hpp"

#include <cmath>

namespace bmt {

namespace {

double lambda_max_sym(const Mat& a) {
  if (a.rows() == 1) return a(0, 0);
  return Eigen::SelfAdjointEigenSolver<Mat>(a, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

struct StepResult {
  Mat factor;   // exp(J dt)
  Mat gram;     // int_0^dt exp(J u) exp(J u)^T du
  double lambda_max;
};

double phi1(double z) { return std::abs(z) < 1e-12 ? 1.0 + 0.5 * z : std::expm1(z) / z; }

// J is symmetric, so both the factor and the within-step Gram come from one
// eigendecomposition.
StepResult frozen_step(const Mat& jac, double dt) {
  if (jac.rows() == 1) {
    const double l = jac(0, 0);
    return {Mat::Constant(1, 1, std::exp(l * dt)), Mat::Constant(1, 1, phi1(2.0 * l * dt) * dt), l};
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jac);
  const Vec& l = es.eigenvalues();
  Vec e(l.size()), w(l.size());
  for (int i = 0; i < l.size(); ++i) {
    e[i] = std::exp(l[i] * dt);
    w[i] = phi1(2.0 * l[i] * dt) * dt;
  }
  const Mat& q = es.eigenvectors();
  return {q * e.asDiagonal() * q.transpose(), q * w.asDiagonal() * q.transpose(), l.maxCoeff()};
}

// Propagator over [t0, t1] with states interpolated linearly between x0 and
// x1; bisected while lambda_max(M) dt > 0.5.
StepResult step_factor(const TargetMeasure& m, double t0, double t1, const Vec& x0, const Vec& x1, int depth) {
  const double dt = t1 - t0;
  const Mat jac = drift_jacobian(m, 0.5 * (t0 + t1), 0.5 * (x0 + x1));
  const double lm = lambda_max_sym(jac);
  if (lm * dt > 0.5 && depth < 30) {
    const Vec xm = 0.5 * (x0 + x1);
    const double tm = 0.5 * (t0 + t1);
    const StepResult a = step_factor(m, t0, tm, x0, xm, depth + 1);
    const StepResult b = step_factor(m, tm, t1, xm, x1, depth + 1);
    return {b.factor * a.factor, b.factor * a.gram * b.factor.transpose() + b.gram,
            std::max(a.lambda_max, b.lambda_max)};
  }
  return frozen_step(0.5 * (jac + jac.transpose()), dt);
}

}  // namespace

Mat JacobianFlow::propagator(int j, int k) const {
  const int d = static_cast<int>(gram.front().rows());
  Mat out = Mat::Identity(d, d);
  for (int i = j; i < k; ++i) out = factors[i] * out;
  return out;
}

JacobianFlow jacobian_flow(const TargetMeasure& m, const Trajectory& path) {
  if (path.failed || path.states.cols() == 0) throw InvalidInput("jacobian_flow: path has no states");
  const int d = m.dim();
  const auto& grid = *path.grid;
  const int k = grid.steps();
  JacobianFlow flow;
  flow.grid = path.grid;
  flow.factors.reserve(k);
  flow.gram.reserve(k + 1);
  flow.gram.push_back(Mat::Zero(d, d));
  try {
    for (int j = 0; j < k; ++j) {
      const double t0 = grid.nodes[j], t1 = grid.nodes[j + 1];
      StepResult st = step_factor(m, t0, t1, path.states.col(j), path.states.col(j + 1), 0);
      const Mat& a = st.factor;
      Mat g = a * flow.gram.back() * a.transpose() + st.gram;
      flow.gram.push_back(0.5 * (g + g.transpose()));
      flow.factors.push_back(std::move(st.factor));
      flow.mid_times.push_back(0.5 * (t0 + t1));
      flow.mid_lambda_max.push_back(st.lambda_max);
    }
  } catch (const std::exception& ex) {
    flow.failed = true;
    flow.failure = ex.what();
  }
  return flow;
}

double malliavin_norm(const JacobianFlow& flow, int k) {
  return std::sqrt(std::max(0.0, lambda_max_sym(flow.gram.at(k))));
}

double malliavin_norm_endpoint(const JacobianFlow& flow) {
  const Mat& g = flow.gram.back();
  const Mat ge = g + flow.grid->endpoint_eps * Mat::Identity(g.rows(), g.cols());
  return std::sqrt(std::max(0.0, lambda_max_sym(ge)));
}

std::vector<double> malliavin_norms_sq(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid,
                                       std::size_t n_paths, std::uint64_t master_seed, int workers) {
  grid->validate();
  std::vector<double> out(n_paths, std::nan(""));
  parallel_for(n_paths, workers, [&](std::size_t i) {
    const Trajectory tr = simulate_path(m, grid, path_seed(master_seed, i));
    if (tr.failed) return;
    const JacobianFlow flow = jacobian_flow(m, tr);
    if (flow.failed) return;
    const double n = malliavin_norm_endpoint(flow);
    out[i] = n * n;
  });
  return out;
}

MeanEstimate moment_estimate(const std::vector<double>& norms_sq, int m) {
  if (m < 1) throw InvalidInput("moment_estimate: m must be >= 1");
  std::vector<double> v;
  v.reserve(norms_sq.size());
  for (double x : norms_sq)
    if (std::isfinite(x)) v.push_back(std::pow(x, m));
  return mean_estimate(v);
}

}  // namespace bmt
