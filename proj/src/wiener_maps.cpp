#include "bmt/wiener_maps.hpp"

#include "bmt/special.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

namespace bmt {

double find_c() {
  double lo = -10.0, hi = 0.0;  // m'(lo) < 1/3 < m'(hi)
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mills_prime(mid) < 1.0 / 3.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

double MillsData::sigma_t(double t) const { return std::sqrt(sigma / ((1.0 - t) * (1.0 - t + sigma))); }

MillsData make_mills_data(double sigma) {
  if (!(sigma >= 1.0)) throw InvalidInput("mills data: sigma must be >= 1");
  return {sigma, find_c()};
}

LogPDerivatives logP_derivatives(double sigma, double t, double x) {
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("logP_derivatives: t outside [0,1)");
  const double s = 1.0 - t;
  const double st = std::sqrt(sigma / (s * (s + sigma)));
  return {st * mills(-st * x) - x / (s + sigma), -st * st * mills_prime(-st * x) - 1.0 / (s + sigma)};
}

double EtaPath::operator()(double t) const {
  const double at_eps = -data.c_star / data.sigma_t(eps);
  if (t < eps) return at_eps * t / eps;
  return -data.c_star / data.sigma_t(t);
}

EtaPath eta_path(const MillsData& data, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidInput("eta_path: eps must lie in (0, 1/2)");
  return {data, eps};
}

SandwichReport sandwich_check(const MillsData& data, double eps, std::size_t n_points) {
  const EtaPath eta = eta_path(data, eps);
  SandwichReport r;
  r.points = n_points;
  r.worst_margin = kInf;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double t = eps + (1.0 - 2.0 * eps) * i / static_cast<double>(n_points - 1);
    const double sec = logP_derivatives(data.sigma, t, eta(t)).second;
    const double lower = -0.5 / (1.0 - t) - 1.0 / (1.0 - t + data.sigma);
    const double upper = -0.125 / (1.0 - t);
    const double margin = std::min(sec - lower, upper - sec);
    r.worst_margin = std::min(r.worst_margin, margin / (1.0 / (1.0 - t)));
    if (margin < 0.0) ++r.violations;
  }
  return r;
}

double derivative_norm_lower_bound(const MillsData& data, double eps, const std::function<double(double)>& path) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;  // (y, accumulated L^2)
  auto rhs = [&](const State& s, State& ds, double t) {
    const double a = logP_derivatives(data.sigma, t, path(t)).second;
    const double yp = 1.0 + a * s[0];
    ds[0] = yp;
    ds[1] = yp * yp;
  };
  State st{0.0, 0.0};
  auto stepper = odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, st, 0.0, eps, eps * 1e-3);
  odeint::integrate_adaptive(stepper, rhs, st, eps, 1.0 - eps, eps * 1e-3);
  return std::sqrt(st[1]);
}

double log_floor(double eps) {
  return std::log(1.0 / eps) / 128.0 + std::log(1.0 / 81.0) / 128.0 - 1.0 / 18.0;
}

EpsilonCurve growth_curve(const MillsData& data, const std::vector<double>& eps_list) {
  EpsilonCurve c;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double e = eps_list[i];
    if (!(e > 0.0 && e < 0.5)) throw InvalidInput("growth_curve: eps must lie in (0, 1/2)");
    if (i > 0 && !(e < eps_list[i - 1])) throw InvalidInput("growth_curve: eps list must decrease");
    const EtaPath eta = eta_path(data, e);
    c.eps_values.push_back(e);
    c.L_values.push_back(derivative_norm_lower_bound(data, e, eta));
    c.log_floor.push_back(log_floor(e));
  }
  const std::size_t n = c.eps_values.size();
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::log(1.0 / c.eps_values[i]);
      const double y = c.L_values[i] * c.L_values[i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    c.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    c.intercept = (sy - c.slope * sx) / n;
  }
  return c;
}

double eps_exceeding(const MillsData& data, double C) {
  for (int j = 4; j <= 80; ++j) {
    const double e = std::pow(10.0, -j / 4.0);
    if (derivative_norm_lower_bound(data, e, eta_path(data, e)) > C) return e;
  }
  return 0.0;
}

TubeReport tube_hit(const MillsData& data, double eps, double delta, std::size_t n_plain, std::size_t n_guided,
                    std::uint64_t seed, int workers, int steps) {
  const EtaPath eta = eta_path(data, eps);
  const double t_end = 1.0 - eps;
  const double dt = t_end / steps;
  const double target_eps = eta(eps);

  // Returns (hit, log-weight).
  auto run = [&](std::uint64_t s, bool guided) -> std::pair<bool, double> {
    Rng rng(s);
    double x = 0.0, logw = 0.0;
    bool inside = true;
    for (int k = 0; k < steps; ++k) {
      const double t = k * dt;
      const double t1 = (k + 1) * dt;
      const double v = logP_derivatives(data.sigma, t, x).first;
      const double w = std::sqrt(dt) * rng.normal();
      double u = 0.0;
      if (guided) {
        const double goal = t < eps ? x + (target_eps - x) * std::min(1.0, dt / (eps - t)) : eta(t1);
        const double gain = t < eps ? 1.0 : 0.5;
        u = gain * (goal - x - v * dt) / dt;
        logw += -u * w - 0.5 * u * u * dt;
      }
      x += (v + u) * dt + w;
      if (t1 >= eps - 1e-12 && std::abs(x - eta(t1)) > delta) {
        inside = false;
        break;
      }
    }
    return {inside, logw};
  };

  TubeReport r;
  r.plain_paths = n_plain;
  r.guided_paths = n_guided;
  std::vector<unsigned char> plain(n_plain);
  parallel_for(n_plain, workers, [&](std::size_t i) { plain[i] = run(derive_seed(seed, {0, i}), false).first; });
  for (auto h : plain) r.plain_hits += h;
  std::vector<double> contrib(n_guided, 0.0);
  std::vector<unsigned char> ghit(n_guided);
  parallel_for(n_guided, workers, [&](std::size_t i) {
    auto [hit, logw] = run(derive_seed(seed, {1, i}), true);
    ghit[i] = hit;
    contrib[i] = hit ? std::exp(logw) : 0.0;
  });
  for (auto h : ghit) r.guided_hits += h;
  const auto est = mean_estimate(contrib);
  r.guided_estimate = est.mean;
  r.guided_std_error = est.std_error;
  return r;
}

OtMap1D::OtMap1D(TargetMeasure m) : m_(std::move(m)) {
  if (m_.dim() != 1 || !m_.has_cdf()) throw InvalidInput("ot_map_1d: needs a 1D target with CDF");
}

double OtMap1D::operator()(double x) const {
  // Solve F_p(y) = Phi(x), on the survival side for x > 0.
  const bool upper = x > 0.0;
  const double target = upper ? normal_sf(x) : normal_cdf(x);
  auto below = [&](double y) { return upper ? m_.sf(y) > target : m_.cdf(y) < target; };
  auto [lo, hi] = m_.model().support_1d();
  if (!std::isfinite(lo)) {
    lo = std::isfinite(hi) ? hi - 1.0 : -1.0;
    for (double step = 1.0; !below(lo); step *= 2.0) lo -= step;
  }
  if (!std::isfinite(hi)) {
    hi = lo + 1.0;
    for (double step = 1.0; below(hi); step *= 2.0) hi += step;
  }
  for (int it = 0; it < 300 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double OtMap1D::derivative(double x) const { return normal_pdf(x) / m_.pdf((*this)(x)); }

OtMap1D ot_map_1d(const TargetMeasure& m) { return OtMap1D(m); }

OtContractionReport wiener_ot_contraction_check(const TargetMeasure& m, double kappa, std::size_t n_pairs,
                                                std::uint64_t seed, int pieces) {
  if (!(kappa >= 0.0)) throw InvalidInput("wiener_ot: kappa must be >= 0");
  const OtMap1D T(m);
  OtContractionReport r;
  r.bound = kappa > 0.0 ? std::max(1.0 / kappa, 1.0) : kInf;
  const Rule& gl = gauss_legendre(32);
  Rng rng(seed);
  const double dt = 1.0 / pieces;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    // omega_1 from a discrete Brownian path; h piecewise linear with unit
    // H^1 norm. Every eighth direction is h(t) = t, the one maximizing h_1.
    double w1 = 0.0;
    for (int j = 0; j < pieces; ++j) w1 += std::sqrt(dt) * rng.normal();
    std::vector<double> hdot(pieces);
    double norm2 = 0.0;
    for (int j = 0; j < pieces; ++j) {
      hdot[j] = (i % 8 == 0) ? 1.0 : rng.normal();
      norm2 += hdot[j] * hdot[j] * dt;
    }
    double h1 = 0.0;
    for (int j = 0; j < pieces; ++j) {
      hdot[j] /= std::sqrt(norm2);
      h1 += hdot[j] * dt;
    }
    double integral = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double rr = 0.5 * (gl.nodes[q] + 1.0);
      integral += 0.5 * gl.weights[q] * T.derivative(w1 + rr * h1);
    }
    const double M = integral - 1.0;
    const double ratio = M * M * h1 * h1 + 2.0 * M * h1 * h1 + 1.0;
    ++r.pairs;
    r.ratios.push_back(ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (ratio > r.bound + 1e-6) ++r.violations;
  }
  return r;
}

}  // namespace bmt
