#include "bmt/follmer.hpp"

#include "bmt/posterior.hpp"
#include "bmt/special.hpp"

#include <algorithm>
#include <cmath>

namespace bmt {

TimeGrid TimeGrid::geometric(double rho, double eps_end) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("grid: rho must lie in (0,1)");
  if (!(eps_end > 0.0 && eps_end < 1.0)) throw InvalidInput("grid: eps_end must lie in (0,1)");
  const int k = std::max(1, static_cast<int>(std::lround(std::log(eps_end) / std::log(rho))));
  const double r = std::pow(eps_end, 1.0 / k);
  TimeGrid g;
  g.endpoint_eps = eps_end;
  g.refinement = GridKind::geometric;
  g.nodes.resize(k + 1);
  for (int i = 0; i <= k; ++i) g.nodes[i] = 1.0 - std::pow(r, i);
  g.nodes[0] = 0.0;
  g.nodes[k] = 1.0 - eps_end;
  return g;
}

TimeGrid TimeGrid::uniform(int steps, double eps_end) {
  if (steps < 1) throw InvalidInput("grid: steps must be positive");
  if (!(eps_end > 0.0 && eps_end < 1.0)) throw InvalidInput("grid: eps_end must lie in (0,1)");
  TimeGrid g;
  g.endpoint_eps = eps_end;
  g.refinement = GridKind::uniform;
  g.nodes.resize(steps + 1);
  for (int i = 0; i <= steps; ++i) g.nodes[i] = (1.0 - eps_end) * i / steps;
  g.nodes[steps] = 1.0 - eps_end;
  return g;
}

void TimeGrid::validate() const {
  if (nodes.size() < 2) throw InvalidInput("grid: needs at least one step");
  if (nodes.front() != 0.0) throw InvalidInput("grid: must start at 0");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw InvalidInput("grid: nodes not strictly increasing");
  if (!(nodes.back() < 1.0)) throw InvalidInput("grid: last node must be < 1");
  if (!(endpoint_eps > 0.0)) throw InvalidInput("grid: endpoint_eps must be positive");
}

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index) { return derive_seed(master_seed, {index}); }

PathNoise draw_noise(const TargetMeasure& m, const TimeGrid& grid, std::uint64_t seed) {
  const int d = m.dim();
  const int k = grid.steps();
  Rng rng(seed);
  PathNoise n;
  n.increments.resize(d, k);
  for (int j = 0; j < k; ++j) {
    const double sd = std::sqrt(grid.dt(j));
    for (int i = 0; i < d; ++i) n.increments(i, j) = sd * rng.normal();
  }
  const int e = m.model().posterior_noise_dim();
  n.endpoint_noise.resize(e);
  for (int i = 0; i < e; ++i) n.endpoint_noise[i] = rng.normal();
  return n;
}

Trajectory simulate_from_noise(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid, PathNoise noise,
                               std::uint64_t seed) {
  const int d = m.dim();
  const int k = grid->steps();
  Trajectory tr;
  tr.grid = grid;
  tr.seed = seed;
  tr.states.resize(d, k + 1);
  tr.states.col(0).setZero();
  Vec x = Vec::Zero(d);
  double energy_prev = 0.0;
  double t = 0.0;
  try {
    for (int j = 0; j < k; ++j) {
      t = grid->nodes[j];
      const Vec v = drift(m, t, x);
      const double energy = 0.5 * v.squaredNorm();
      if (j > 0) tr.action += 0.5 * (energy_prev + energy) * grid->dt(j - 1);
      energy_prev = energy;
      x += v * grid->dt(j) + noise.increments.col(j);
      if (!x.allFinite()) throw PosteriorDegenerate("non-finite state");
      tr.states.col(j + 1) = x;
    }
    t = grid->nodes[k];
    const PosteriorMoments pm = posterior_moments(m, t, x);
    const double energy = 0.5 * pm.drift.squaredNorm();
    tr.action += 0.5 * (energy_prev + energy) * grid->dt(k - 1) + energy * grid->endpoint_eps;
    if (m.model().samples_posterior())
      tr.endpoint = m.model().sample_posterior(grid->endpoint_eps, x,
                                               std::span<const double>(noise.endpoint_noise.data(),
                                                                       noise.endpoint_noise.size()));
    else
      tr.endpoint = x + pm.drift * grid->endpoint_eps;
  } catch (const std::exception& ex) {
    tr.failed = true;
    tr.failure_time = t;
    tr.failure = ex.what();
  }
  tr.noise = std::move(noise);
  return tr;
}

Trajectory simulate_path(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid, std::uint64_t seed) {
  PathNoise n = draw_noise(m, *grid, seed);
  return simulate_from_noise(m, std::move(grid), std::move(n), seed);
}

std::vector<Vec> Ensemble::endpoints() const {
  std::vector<Vec> out;
  out.reserve(paths.size());
  for (const auto& p : paths)
    if (!p.failed) out.push_back(p.endpoint);
  return out;
}

double Ensemble::failure_fraction() const {
  return paths.empty() ? 0.0 : static_cast<double>(failures) / static_cast<double>(paths.size());
}

Ensemble simulate_ensemble(const TargetMeasure& m, std::shared_ptr<const TimeGrid> grid, std::size_t n_paths,
                           std::uint64_t master_seed, int workers, bool keep_states) {
  if (n_paths < 1) throw InvalidInput("simulate_ensemble: n_paths must be >= 1");
  grid->validate();
  Ensemble e;
  e.paths.resize(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    Trajectory tr = simulate_path(m, grid, path_seed(master_seed, i));
    if (!keep_states) {
      tr.states.resize(0, 0);
      tr.noise = PathNoise{};
    }
    e.paths[i] = std::move(tr);
  });
  for (const auto& p : e.paths) e.failures += p.failed ? 1 : 0;
  return e;
}

double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

EndpointReport endpoint_distribution_check(const Ensemble& e, const TargetMeasure& m, double threshold,
                                           std::uint64_t seed) {
  EndpointReport r;
  const auto ends = e.endpoints();
  r.n = ends.size();
  r.threshold = threshold;
  if (m.dim() == 1) {
    if (!m.has_cdf()) throw InvalidInput("endpoint check: 1D target without CDF");
    std::vector<double> v(ends.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = ends[i][0];
    r.ks = ks_statistic(std::move(v), [&](double x) { return m.cdf(x); });
    r.passed = r.ks < threshold;
    return r;
  }
  if (!m.has_sampler()) throw InvalidInput("endpoint check: target without sampler");
  const int d = m.dim();
  Rng rng(seed);
  std::vector<Vec> ref(ends.size());
  for (auto& v : ref) v = m.sample(rng);
  auto stat = [&](const std::vector<Vec>& xs, auto fn) {
    std::vector<double> vals(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = fn(xs[i]);
    return mean_estimate(vals);
  };
  double max_z = 0.0;
  auto compare = [&](auto fn) {
    const auto a = stat(ends, fn);
    const auto b = stat(ref, fn);
    const double se = std::hypot(a.std_error, b.std_error);
    if (se > 0.0) max_z = std::max(max_z, std::abs(a.mean - b.mean) / se);
  };
  for (int i = 0; i < d; ++i) {
    compare([i](const Vec& x) { return x[i]; });
    for (int j = i; j < d; ++j) compare([i, j](const Vec& x) { return x[i] * x[j]; });
  }
  r.max_z = max_z;
  r.passed = max_z < 4.0;
  return r;
}

EntropyReport entropy_identity_check(const TargetMeasure& m, const Ensemble& e) {
  EntropyReport r;
  r.entropy = relative_entropy(m);
  std::vector<double> a;
  a.reserve(e.paths.size());
  for (const auto& p : e.paths)
    if (!p.failed) a.push_back(p.action);
  const auto est = mean_estimate(a);
  r.path_integral = est.mean;
  r.std_error = est.std_error;
  const double scale = std::abs(r.entropy);
  r.relative_error = scale > 0.0 ? std::abs(r.path_integral - r.entropy) / scale : std::abs(r.path_integral);
  return r;
}

LocalizationDiagnostics localization_diagnostics(const TargetMeasure& m, const Trajectory& path, double q,
                                                 int stride) {
  if (path.failed || path.states.cols() == 0) throw InvalidInput("localization: path has no states");
  LocalizationDiagnostics ld;
  const int k = path.grid->steps();
  for (int j = 0; j <= k; j += std::max(1, stride)) {
    const double t = path.grid->nodes[j];
    const Vec x = path.states.col(j);
    const PosteriorMoments pm = posterior_moments(m, t, x);
    ld.times.push_back(t);
    ld.barycenters.push_back(pm.mean);
    ld.covariances.push_back(pm.cov);
    Eigen::SelfAdjointEigenSolver<Mat> es(pm.cov);
    double g = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) g += std::pow(std::max(0.0, es.eigenvalues()[i]), q);
    ld.gamma_q.push_back(g);

    if (m.dim() == 1) {
      // p_t(y) = f(y) phi^{X_t,1-t}(y) / P_{1-t} f(X_t) against the model's
      // own representation of p^{X_t,1-t}.
      const double s = 1.0 - t;
      const double sd = std::sqrt(pm.cov(0, 0));
      double peak = 0.0, err = 0.0;
      for (int i = 0; i <= 100; ++i) {
        const double y = pm.mean[0] + sd * (-6.0 + 0.12 * i);
        const double lf = m.log_f(Vec::Constant(1, y));
        const double lhs = std::isfinite(lf)
                               ? std::exp(lf + normal_log_pdf((y - x[0]) / std::sqrt(s)) - 0.5 * std::log(s) -
                                          pm.log_mass)
                               : 0.0;
        auto rl = m.model().posterior_log_density(s, x[0], y);
        if (!rl) continue;
        const double rhs = std::exp(*rl);
        peak = std::max(peak, rhs);
        err = std::max(err, std::abs(lhs - rhs));
      }
      if (peak > 0.0) ld.density_identity_error = std::max(ld.density_identity_error, err / peak);
    }
  }
  return ld;
}

MartingaleReport barycenter_martingale_check(const TargetMeasure& m, const Ensemble& e) {
  MartingaleReport r;
  const auto& grid = *e.paths.front().grid;
  const int k = grid.steps();
  r.initial = posterior_moments(m, 0.0, Vec::Zero(m.dim())).mean[0];
  std::vector<std::vector<double>> a(k + 1);
  for (const auto& p : e.paths) {
    if (p.failed || p.states.cols() == 0) continue;
    for (int j = 0; j <= k; ++j) a[j].push_back(posterior_moments(m, grid.nodes[j], p.states.col(j)).mean[0]);
  }
  for (int j = 0; j <= k; ++j) {
    const auto est = mean_estimate(a[j]);
    r.times.push_back(grid.nodes[j]);
    r.mean.push_back(est.mean);
    r.std_error.push_back(est.std_error);
    if (est.std_error > 0.0) r.max_z = std::max(r.max_z, std::abs(est.mean - r.initial) / est.std_error);
  }
  r.passed = r.max_z < 3.0;
  return r;
}

}  // namespace bmt
