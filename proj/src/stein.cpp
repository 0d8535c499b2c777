#include "bmt/stein.hpp"

#include "bmt/malliavin.hpp"
#include "bmt/posterior.hpp"
#include "bmt/special.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bmt {

SteinFunction identity_statistic() { return centered_statistic(0.0); }

SteinFunction centered_statistic(double mean) {
  return {"x", [mean](const Vec& x) { return x[0] - mean; },
          [](const Vec& x) {
            Vec g = Vec::Zero(x.size());
            g[0] = 1.0;
            return g;
          }};
}

SteinFunction chi_square_statistic() {
  return {"x^2-1", [](const Vec& x) { return x[0] * x[0] - 1.0; },
          [](const Vec& x) {
            Vec g = Vec::Zero(x.size());
            g[0] = 2.0 * x[0];
            return g;
          }};
}

std::pair<std::vector<double>, std::vector<double>> mehler_grid(int n) {
  const Rule& r = gauss_legendre(n);
  std::vector<double> u(n), w(n);
  for (int i = 0; i < n; ++i) {
    u[i] = 0.5 * (r.nodes[i] + 1.0);
    w[i] = 0.5 * r.weights[i];
  }
  return {u, w};
}

namespace {

struct PathDerivative {
  double F = 0.0;
  Mat D;  // d x (K+1): D F on step j for j < K, last column the sliver [t_K, 1]
  bool ok = false;
};

PathDerivative path_derivative(const TargetMeasure& m, const SteinFunction& chi,
                               const std::shared_ptr<const TimeGrid>& grid, PathNoise noise) {
  PathDerivative out;
  const Trajectory tr = simulate_from_noise(m, grid, std::move(noise));
  if (tr.failed) return out;
  // Exact derivative of the simulated map: Euler factors I + grad v(t_j, X_j) dt_j,
  // then the endpoint step, which moves the posterior mean by Cov/eps_end.
  const int d = m.dim();
  const int k = grid->steps();
  out.F = chi.chi(tr.endpoint);
  const Vec g = chi.grad(tr.endpoint);
  out.D.resize(d, k + 1);
  out.D.col(k) = g;
  const Mat id = Mat::Identity(d, d);
  try {
    Eigen::RowVectorXd row =
        g.transpose() * (id + drift_jacobian(m, grid->nodes[k], tr.states.col(k)) * grid->endpoint_eps);
    for (int j = k - 1; j >= 0; --j) {
      out.D.col(j) = row.transpose();
      row = row * (id + drift_jacobian(m, grid->nodes[j], tr.states.col(j)) * grid->dt(j));
    }
    if (!row.allFinite()) return out;
  } catch (const std::exception&) {
    return out;
  }
  out.ok = true;
  return out;
}

double h_product(const Mat& a, const Mat& b, const TimeGrid& grid) {
  const int k = grid.steps();
  double acc = 0.0;
  for (int j = 0; j < k; ++j) acc += a.col(j).dot(b.col(j)) * grid.dt(j);
  return acc + a.col(k).dot(b.col(k)) * grid.endpoint_eps;
}

void fill_bins(SteinKernelEstimate& e, int bins, std::size_t min_count) {
  const std::size_t n = e.F.size();
  e.bin_lo.clear();
  e.bin_hi.clear();
  e.bin_center.clear();
  e.tau.clear();
  e.tau_sd.clear();
  e.counts.clear();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return e.F[a] < e.F[b]; });
  std::size_t nb = std::max<std::size_t>(1, std::min<std::size_t>(bins, n / std::max<std::size_t>(1, min_count)));
  std::vector<std::size_t> edges(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) edges[b] = b * n / nb;
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<double> taus, fs;
    for (std::size_t i = edges[b]; i < edges[b + 1]; ++i) {
      taus.push_back(e.tau_path[order[i]]);
      fs.push_back(e.F[order[i]]);
    }
    const auto est = mean_estimate(taus);
    e.tau.push_back(est.mean);
    e.tau_sd.push_back(est.std_error);
    e.counts.push_back(taus.size());
    e.bin_center.push_back(mean_estimate(fs).mean);
    e.bin_lo.push_back(b == 0 ? -kInf : 0.5 * (e.F[order[edges[b] - 1]] + e.F[order[edges[b]]]));
    e.bin_hi.push_back(b + 1 == nb ? kInf : 0.5 * (e.F[order[edges[b + 1] - 1]] + e.F[order[edges[b + 1]]]));
  }
  double disc = 0.0, sq = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const double w = static_cast<double>(e.counts[b]) / n;
    disc += w * (e.tau[b] - 1.0) * (e.tau[b] - 1.0);
    sq += w * e.tau[b] * e.tau[b];
  }
  e.discrepancy_sq = disc;
  e.tau_sq_mean = sq;
}

}  // namespace

double SteinKernelEstimate::operator()(double x) const {
  auto it = std::upper_bound(bin_hi.begin(), bin_hi.end(), x);
  std::size_t b = std::min<std::size_t>(it - bin_hi.begin(), tau.size() - 1);
  return tau[b];
}

SteinKernelEstimate stein_kernel_estimate(const TargetMeasure& m, const SteinFunction& chi,
                                          const SteinOptions& opts) {
  if (m.dim() > 2) throw InvalidInput("stein: dimension limited to d <= 2");
  if (!opts.grid) throw InvalidInput("stein: grid required");
  if (opts.n_outer < opts.min_count) throw InvalidInput("stein: n_outer below the bin occupancy floor");
  const auto grid = opts.grid;
  const auto [u, w] = mehler_grid(opts.s_nodes);
  const std::size_t n = opts.n_outer;
  std::vector<double> F(n, std::nan("")), tau(n, std::nan(""));
  std::vector<std::size_t> fails(n, 0);
  parallel_for(n, opts.workers, [&](std::size_t i) {
    const std::uint64_t outer_seed = derive_seed(opts.seed, {i});
    const PathNoise base = draw_noise(m, *grid, outer_seed);
    const PathDerivative pd = path_derivative(m, chi, grid, base);
    if (!pd.ok) {
      ++fails[i];
      return;
    }
    double acc = 0.0;
    for (std::size_t si = 0; si < u.size(); ++si) {
      const double a = 1.0 - u[si];  // e^{-s}
      const double b = std::sqrt(1.0 - a * a);
      Mat avg = Mat::Zero(pd.D.rows(), pd.D.cols());
      int ok = 0;
      for (int r = 0; r < opts.n_inner; ++r) {
        const PathNoise fresh = draw_noise(
            m, *grid, derive_seed(opts.seed, {i, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(si) + 1}));
        PathNoise mixed;
        mixed.increments = a * base.increments + b * fresh.increments;
        mixed.endpoint_noise = a * base.endpoint_noise + b * fresh.endpoint_noise;
        const PathDerivative q = path_derivative(m, chi, grid, std::move(mixed));
        if (!q.ok) {
          ++fails[i];
          continue;
        }
        avg += q.D;
        ++ok;
      }
      if (ok == 0) return;
      avg /= ok;
      acc += w[si] * h_product(pd.D, avg, *grid);
    }
    F[i] = pd.F;
    tau[i] = acc;
  });

  SteinKernelEstimate e;
  e.inner_total = n * (1 + u.size() * opts.n_inner);
  for (auto f : fails) e.inner_failures += f;
  if (static_cast<double>(e.inner_failures) > 0.01 * e.inner_total)
    throw PosteriorDegenerate("stein: inner simulation failure rate above 1%");
  std::vector<double> fv;
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(F[i]) && std::isfinite(tau[i])) {
      e.F.push_back(F[i]);
      e.tau_path.push_back(tau[i]);
    }
  e.chi_mean = mean_estimate(e.F).mean;
  for (auto& f : e.F) f -= e.chi_mean;
  fill_bins(e, opts.bins, opts.min_count);
  return e;
}

SteinKernelEstimate rebin(const SteinKernelEstimate& e, int bins, std::size_t min_count) {
  SteinKernelEstimate out = e;
  fill_bins(out, bins, min_count);
  return out;
}

double stein_discrepancy(const SteinKernelEstimate& e) { return e.discrepancy_sq; }

std::vector<SteinIdentityRow> stein_identity_check(const SteinKernelEstimate& e, const std::vector<double>& samples,
                                                   int n_boot, std::uint64_t seed) {
  struct Eta {
    const char* label;
    double (*f)(double);
    double (*df)(double);
  };
  static const Eta family[] = {
      {"x", [](double y) { return y; }, [](double) { return 1.0; }},
      {"x^3", [](double y) { return y * y * y; }, [](double y) { return 3.0 * y * y; }},
      {"sin", [](double y) { return std::sin(y); }, [](double y) { return std::cos(y); }},
      {"tanh", [](double y) { return std::tanh(y); },
       [](double y) {
         const double c = std::cosh(y);
         return 1.0 / (c * c);
       }},
  };
  const SteinKernelEstimate coarse = rebin(e, std::max<int>(1, static_cast<int>(e.tau.size()) / 2), 1);
  const std::size_t n = samples.size();
  std::vector<SteinIdentityRow> rows;
  for (std::size_t fi = 0; fi < std::size(family); ++fi) {
    const auto& eta = family[fi];
    auto residual = [&](const SteinKernelEstimate& k, auto begin, auto end) {
      double a = 0.0, b = 0.0;
      std::size_t c = 0;
      for (auto it = begin; it != end; ++it) {
        const double y = samples[*it];
        a += eta.f(y) * y;
        b += eta.df(y) * k(y);
        ++c;
      }
      return (a - b) / c;
    };
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    SteinIdentityRow row;
    row.label = eta.label;
    const double res = residual(e, all.begin(), all.end());
    row.residual = std::abs(res);
    row.bin_allowance = std::abs(residual(coarse, all.begin(), all.end()) - res);
    // Sample bootstrap plus the kernel's own per-bin uncertainty.
    std::vector<double> boots(n_boot);
    std::vector<std::size_t> idx(n);
    for (int b = 0; b < n_boot; ++b) {
      Rng rng(derive_seed(seed, {fi, static_cast<std::uint64_t>(b)}));
      for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform() * n) % n;
      boots[b] = residual(e, idx.begin(), idx.end());
    }
    std::vector<double> mass(e.tau.size(), 0.0);
    for (double y : samples) {
      auto it = std::upper_bound(e.bin_hi.begin(), e.bin_hi.end(), y);
      const std::size_t bi = std::min<std::size_t>(it - e.bin_hi.begin(), e.tau.size() - 1);
      mass[bi] += eta.df(y) / n;
    }
    double kernel_var = 0.0;
    for (std::size_t bi = 0; bi < mass.size(); ++bi) kernel_var += std::pow(mass[bi] * e.tau_sd[bi], 2);
    row.sd = std::sqrt(std::pow(mean_estimate(boots).sd, 2) + kernel_var);
    row.passed = row.residual < 3.0 * row.sd + row.bin_allowance + 1e-12;
    rows.push_back(row);
  }
  return rows;
}

double w2_squared_quantile(const std::function<double(double)>& q) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(
      [&](double u) {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double d = q(u) - normal_quantile(u);
        return d * d;
      },
      0.0, 1.0, 1e-10);
}

double w2_squared_empirical(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  std::vector<double> terms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - normal_quantile((i + 0.5) / n);
    terms[i] = d * d;
  }
  return compensated_sum(terms) / n;
}

CltReport clt_rate_check(const std::function<double(Rng&)>& draw, const std::vector<int>& n_list, std::size_t n_mc,
                         double tau_sq_mean, std::uint64_t seed) {
  CltReport rep;
  // Whitening constants from a pilot sample.
  Rng pilot(derive_seed(seed, {0}));
  std::vector<double> pv(200000);
  for (auto& v : pv) v = draw(pilot);
  const auto pe = mean_estimate(pv);
  {
    Rng g(derive_seed(seed, {1}));
    std::vector<double> z(n_mc);
    for (auto& v : z) v = g.normal();
    rep.resolution = w2_squared_empirical(std::move(z));
  }
  double lo = kInf, hi = 0.0;
  rep.bound_holds = true;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const int n = n_list[k];
    Rng rng(derive_seed(seed, {2, k}));
    std::vector<double> sums(n_mc);
    for (auto& s : sums) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += (draw(rng) - pe.mean) / pe.sd;
      s = acc / std::sqrt(static_cast<double>(n));
    }
    CltRow row;
    row.n = n;
    row.w2_sq = w2_squared_empirical(std::move(sums));
    row.bound = 2.0 * (tau_sq_mean + 1.0) / n;
    row.scaled = n * row.w2_sq;
    row.bound_holds = row.w2_sq <= row.bound + 3.0 * rep.resolution;
    rep.bound_holds = rep.bound_holds && row.bound_holds;
    lo = std::min(lo, row.scaled);
    hi = std::max(hi, row.scaled);
    rep.rows.push_back(row);
  }
  rep.ratio = lo > 0.0 ? hi / lo : kInf;
  return rep;
}

}  // namespace bmt
