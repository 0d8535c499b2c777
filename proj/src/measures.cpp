#include "bmt/measures.hpp"

#include "bmt/special.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <array>
#include <numeric>

namespace bmt {

const char* to_string(PosteriorMethod m) {
  switch (m) {
    case PosteriorMethod::closed_form: return "closed_form";
    case PosteriorMethod::gauss_hermite: return "gauss_hermite";
    case PosteriorMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

bool MeasureModel::contains(const Vec& x) const { return std::isfinite(log_f(x)); }

std::optional<PosteriorMoments> MeasureModel::closed_form_posterior(double, const Vec&) const {
  return std::nullopt;
}

Vec MeasureModel::sample_posterior(double, const Vec&, std::span<const double>) const {
  throw InvalidInput("measure has no exact posterior sampler");
}

std::optional<double> MeasureModel::posterior_log_density(double, double, double) const {
  return std::nullopt;
}

Vec MeasureModel::sample(Rng&) const { throw InvalidInput("measure has no exact sampler"); }
double MeasureModel::cdf(double) const { throw InvalidInput("measure has no CDF"); }
double MeasureModel::pdf(double) const { throw InvalidInput("measure has no density"); }

double MeasureModel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u outside (0,1)");
  auto [lo, hi] = support_1d();
  double step = 1.0;
  if (!std::isfinite(lo)) {
    lo = std::isfinite(hi) ? hi - step : -step;
    while (cdf(lo) > u) lo -= (step *= 2.0);
  }
  step = 1.0;
  if (!std::isfinite(hi)) {
    hi = lo + step;
    while (sf(hi) > 1.0 - u) hi += (step *= 2.0);
  }
  // Bisection on whichever tail function is better conditioned.
  const bool upper = u > 0.5;
  const double target = upper ? 1.0 - u : u;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool below = upper ? sf(mid) > target : cdf(mid) < target;
    (below ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

PosteriorMoments scalar_posterior(double x, double s, double mean, double shift, double var,
                                  double jac, double log_mass) {
  PosteriorMoments pm;
  pm.mean = Vec::Constant(1, mean);
  pm.cov = Mat::Constant(1, 1, var);
  pm.log_mass = log_mass;
  pm.method = PosteriorMethod::closed_form;
  pm.drift = Vec::Constant(1, shift / s);
  pm.drift_jacobian = Mat::Constant(1, 1, jac);
  (void)x;
  return pm;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double a : v) acc += std::exp(a - mx);
  return mx + std::log(acc);
}

// ---------------------------------------------------------------- Gaussian

class GaussianModel final : public MeasureModel {
 public:
  GaussianModel(Vec mean, Mat cov) : a_(std::move(mean)), c_(std::move(cov)) {
    Eigen::LLT<Mat> llt(c_);
    if (llt.info() != Eigen::Success) throw InvalidInput("gaussian: covariance is not positive definite");
    chol_ = llt.matrixL();
    cinv_ = llt.solve(Mat::Identity(dim(), dim()));
    logdet_ = 2.0 * chol_.diagonal().array().log().sum();
    identity_ = a_.isZero(0.0) && c_.isIdentity(0.0);
  }

  int dim() const override { return static_cast<int>(a_.size()); }

  double log_f(const Vec& y) const override {
    const Vec r = y - a_;
    return -0.5 * r.dot(cinv_ * r) - 0.5 * logdet_ + 0.5 * y.squaredNorm();
  }
  Vec grad_log_f(const Vec& y) const override { return -cinv_ * (y - a_) + y; }
  bool contains(const Vec&) const override { return true; }

  std::optional<PosteriorMoments> closed_form_posterior(double s, const Vec& x) const override {
    const int d = dim();
    PosteriorMoments pm;
    pm.method = PosteriorMethod::closed_form;
    if (identity_) {
      pm.mean = x;
      pm.cov = s * Mat::Identity(d, d);
      pm.log_mass = 0.0;
      pm.drift = Vec::Zero(d);
      pm.drift_jacobian = Mat::Zero(d, d);
      return pm;
    }
    const double tau = (1.0 - s) / s;
    const Mat lambda = cinv_ + tau * Mat::Identity(d, d);
    Eigen::LLT<Mat> llt(lambda);
    const Mat sigma = llt.solve(Mat::Identity(d, d));
    const Vec shift = sigma * (cinv_ * (a_ - x) + x);
    pm.mean = x + shift;
    pm.cov = 0.5 * (sigma + sigma.transpose());
    pm.drift = shift / s;
    const Mat jac = sigma * (Mat::Identity(d, d) - cinv_) / s;
    pm.drift_jacobian = 0.5 * (jac + jac.transpose());
    const Vec h = cinv_ * a_ + x / s;
    const Mat lchol = llt.matrixL();
    const double logdet_lambda = 2.0 * lchol.diagonal().array().log().sum();
    const double c0 = -0.5 * a_.dot(cinv_ * a_) - 0.5 * (d * kLogTwoPi + logdet_) + 0.5 * d * kLogTwoPi -
                      0.5 * x.squaredNorm() / s - 0.5 * d * (kLogTwoPi + std::log(s));
    pm.log_mass = c0 + 0.5 * h.dot(sigma * h) + 0.5 * d * kLogTwoPi - 0.5 * logdet_lambda;
    return pm;
  }

  bool samples_posterior() const override { return true; }
  Vec sample_posterior(double s, const Vec& x, std::span<const double> noise) const override {
    const int d = dim();
    auto pm = *closed_form_posterior(s, x);
    Eigen::LLT<Mat> llt(pm.cov);
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = noise[i];
    return pm.mean + Mat(llt.matrixL()) * z;
  }
  std::optional<double> posterior_log_density(double s, double x, double y) const override {
    auto pm = *closed_form_posterior(s, Vec::Constant(1, x));
    const double sd = std::sqrt(pm.cov(0, 0));
    return normal_log_pdf((y - pm.mean[0]) / sd) - std::log(sd);
  }

  bool has_sampler() const override { return true; }
  Vec sample(Rng& rng) const override { return a_ + chol_ * rng.normal_vector(dim()); }

  bool has_cdf() const override { return dim() == 1; }
  double cdf(double x) const override { return normal_cdf((x - a_[0]) / chol_(0, 0)); }
  double sf(double x) const override { return normal_sf((x - a_[0]) / chol_(0, 0)); }
  double pdf(double x) const override { return normal_pdf((x - a_[0]) / chol_(0, 0)) / chol_(0, 0); }
  double quantile(double u) const override { return a_[0] + chol_(0, 0) * normal_quantile(u); }

 private:
  Vec a_;
  Mat c_;
  Mat chol_;
  Mat cinv_;
  double logdet_ = 0.0;
  bool identity_ = false;
};

// ------------------------------------------------------ truncated Gaussian

class TruncatedGaussianModel final : public MeasureModel {
 public:
  explicit TruncatedGaussianModel(double sigma)
      : sigma_(sigma), log_z_(std::log(truncated_gaussian_normalizer(sigma))),
        sd_p_(std::sqrt(sigma / (1.0 + sigma))) {}

  int dim() const override { return 1; }
  double log_f(const Vec& y) const override {
    if (y[0] < 0.0) return -kInf;
    return -0.5 * y[0] * y[0] / sigma_ - log_z_;
  }
  Vec grad_log_f(const Vec& y) const override { return Vec::Constant(1, -y[0] / sigma_); }
  bool contains(const Vec& y) const override { return y[0] >= 0.0; }

  struct Params {
    double mu, sd, alpha, sigma_s;
  };
  Params params(double s, double x) const {
    const double sig_s = std::sqrt(sigma_ / (s * (sigma_ + s)));
    return {sigma_ * x / (sigma_ + s), std::sqrt(sigma_ * s / (sigma_ + s)), -sig_s * x, sig_s};
  }

  std::optional<PosteriorMoments> closed_form_posterior(double s, const Vec& xv) const override {
    const double x = xv[0];
    const Params p = params(s, x);
    const double m = mills(p.alpha);
    const double mean = p.mu + p.sd * m;
    const double shift = -s * x / (sigma_ + s) + p.sd * m;
    const double var = p.sd * p.sd * one_minus_mills_prime(p.alpha);
    const double jac = -p.sigma_s * p.sigma_s * mills_prime(p.alpha) - 1.0 / (s + sigma_);
    const double log_mass = 0.5 * std::log(sigma_ / (s + sigma_)) - log_z_ - 0.5 * x * x / (s + sigma_) +
                            normal_log_sf(p.alpha);
    return scalar_posterior(x, s, mean, shift, var, jac, log_mass);
  }

  bool samples_posterior() const override { return true; }
  Vec sample_posterior(double s, const Vec& x, std::span<const double> noise) const override {
    const Params p = params(s, x[0]);
    return Vec::Constant(1, std::max(0.0, p.mu + p.sd * truncated_standard_normal_from(p.alpha, noise[0])));
  }
  std::optional<double> posterior_log_density(double s, double x, double y) const override {
    if (y < 0.0) return -kInf;
    const Params p = params(s, x);
    return normal_log_pdf((y - p.mu) / p.sd) - std::log(p.sd) - normal_log_sf(p.alpha);
  }

  bool has_sampler() const override { return true; }
  Vec sample(Rng& rng) const override { return Vec::Constant(1, sd_p_ * std::abs(rng.normal())); }

  bool has_cdf() const override { return true; }
  double cdf(double x) const override { return x <= 0.0 ? 0.0 : 1.0 - 2.0 * normal_sf(x / sd_p_); }
  double sf(double x) const override { return x <= 0.0 ? 1.0 : 2.0 * normal_sf(x / sd_p_); }
  double pdf(double x) const override { return x < 0.0 ? 0.0 : 2.0 * normal_pdf(x / sd_p_) / sd_p_; }
  double quantile(double u) const override { return sd_p_ * normal_sf_inverse(0.5 * (1.0 - u)); }
  std::pair<double, double> support_1d() const override { return {0.0, kInf}; }

 private:
  double sigma_;
  double log_z_;
  double sd_p_;
};

// --------------------------------------------------------- uniform interval

// Integrals of exp(-tau y^2/2 + h y) over [a, b] on a window where the
// exponent is within 60 of its maximum, by 64-point Gauss-Legendre.
struct ExpQuadratic {
  double log_integral;
  double mean;
  double var;
  double peak;
};

ExpQuadratic exp_quadratic_moments(double a, double b, double tau, double h) {
  double peak;
  if (tau > 0.0)
    peak = std::clamp(h / tau, a, b);
  else
    peak = h > 0.0 ? b : (h < 0.0 ? a : 0.5 * (a + b));
  const double g = h - tau * peak;
  const double root = std::sqrt(g * g + 120.0 * tau);
  const double dl = (g + root) > 0.0 ? 120.0 / (g + root) : kInf;
  const double du = (root - g) > 0.0 ? 120.0 / (root - g) : kInf;
  const double lo = std::max(a, peak - dl);
  const double hi = std::min(b, peak + du);
  const Rule& rule = gauss_legendre(64);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double z = 0.0, m1 = 0.0;
  std::array<double, 64> ys{}, ws{};
  for (int i = 0; i < 64; ++i) {
    const double y = mid + half * rule.nodes[i];
    const double dy = y - peak;
    const double w = rule.weights[i] * std::exp(dy * (g - 0.5 * tau * dy));
    ys[i] = y;
    ws[i] = w;
    z += w;
    m1 += w * y;
  }
  const double mean = m1 / z;
  double m2 = 0.0;
  for (int i = 0; i < 64; ++i) m2 += ws[i] * (ys[i] - mean) * (ys[i] - mean);
  const double q_peak = -0.5 * tau * peak * peak + h * peak;
  return {q_peak + std::log(z * half), mean, m2 / z, peak};
}

class UniformIntervalModel final : public MeasureModel {
 public:
  UniformIntervalModel(double lower, double width) : a_(lower), b_(lower + width), w_(width) {}

  int dim() const override { return 1; }
  double log_f(const Vec& y) const override {
    if (!contains(y)) return -kInf;
    return -std::log(w_) + 0.5 * kLogTwoPi + 0.5 * y[0] * y[0];
  }
  Vec grad_log_f(const Vec& y) const override { return y; }
  bool contains(const Vec& y) const override { return y[0] >= a_ && y[0] <= b_; }

  std::optional<PosteriorMoments> closed_form_posterior(double s, const Vec& xv) const override {
    const double x = xv[0];
    const double tau = (1.0 - s) / s;
    const ExpQuadratic q = exp_quadratic_moments(a_, b_, tau, x / s);
    const double jac = q.var / (s * s) - 1.0 / s;
    // -x^2/(2s) + q(peak) rewritten as -(x-peak)^2/(2s) + peak^2/2.
    const double log_mass = 0.5 * kLogTwoPi - std::log(w_) - 0.5 * (kLogTwoPi + std::log(s)) -
                            0.5 * (x - q.peak) * (x - q.peak) / s + 0.5 * q.peak * q.peak +
                            (q.log_integral - (-0.5 * tau * q.peak * q.peak + x / s * q.peak));
    return scalar_posterior(x, s, q.mean, q.mean - x, q.var, jac, log_mass);
  }
  std::optional<double> posterior_log_density(double s, double x, double y) const override {
    if (y < a_ || y > b_) return -kInf;
    const double tau = (1.0 - s) / s;
    const ExpQuadratic q = exp_quadratic_moments(a_, b_, tau, x / s);
    return -0.5 * tau * y * y + x / s * y - q.log_integral;
  }

  bool has_sampler() const override { return true; }
  Vec sample(Rng& rng) const override { return Vec::Constant(1, a_ + w_ * rng.uniform()); }

  bool has_cdf() const override { return true; }
  double cdf(double x) const override { return std::clamp((x - a_) / w_, 0.0, 1.0); }
  double sf(double x) const override { return std::clamp((b_ - x) / w_, 0.0, 1.0); }
  double pdf(double x) const override { return (x >= a_ && x <= b_) ? 1.0 / w_ : 0.0; }
  double quantile(double u) const override { return a_ + w_ * u; }
  std::pair<double, double> support_1d() const override { return {a_, b_}; }

 private:
  double a_, b_, w_;
};

// ------------------------------------------------------------- uniform ball

class UniformBallModel final : public MeasureModel {
 public:
  UniformBallModel(double radius, int d) : r_(radius), d_(d) {
    log_volume_ = 0.5 * d * std::log(kPi) - std::lgamma(0.5 * d + 1.0) + d * std::log(radius);
  }

  int dim() const override { return d_; }
  double log_f(const Vec& y) const override {
    if (!contains(y)) return -kInf;
    return -log_volume_ + 0.5 * d_ * kLogTwoPi + 0.5 * y.squaredNorm();
  }
  Vec grad_log_f(const Vec& y) const override { return y; }
  bool contains(const Vec& y) const override { return y.norm() <= r_; }

  std::optional<PosteriorMoments> closed_form_posterior(double s, const Vec& x) const override {
    namespace bq = boost::math::quadrature;
    const double tau = (1.0 - s) / s;
    const Vec h = x / s;
    const double hn = h.norm();
    const double k = d_ - 1;
    // Perpendicular mass and second moment at slice u, up to constants that
    // cancel in the moments (log_mass adds them back below).
    auto perp = [&](double u) -> std::pair<double, double> {
      const double rho2 = std::max(0.0, r_ * r_ - u * u);
      if (tau == 0.0) return {std::pow(rho2, 0.5 * k), std::pow(rho2, 0.5 * k + 1.0) * k / (k + 2.0)};
      const double z = 0.5 * tau * rho2;
      const double p0 = boost::math::gamma_p(0.5 * k, z);
      const double p1 = boost::math::gamma_p(0.5 * k + 1.0, z);
      return {p0, p1 * k / tau};
    };
    double peak = tau > 0.0 ? std::clamp(hn / tau, -r_, r_) : (hn > 0.0 ? r_ : 0.0);
    const double g = hn - tau * peak;
    const double root = std::sqrt(g * g + 120.0 * tau);
    const double lo = (g + root) > 0.0 ? std::max(-r_, peak - 120.0 / (g + root)) : -r_;
    const double hi = (root - g) > 0.0 ? std::min(r_, peak + 120.0 / (root - g)) : r_;
    auto weight = [&](double u) {
      const double du = u - peak;
      return std::exp(du * (g - 0.5 * tau * du));
    };
    bq::tanh_sinh<double> integrator;
    auto integ = [&](auto fn) { return integrator.integrate(fn, lo, hi, 1e-13); };
    const double z0 = integ([&](double u) { return weight(u) * perp(u).first; });
    const double mu = integ([&](double u) { return u * weight(u) * perp(u).first; }) / z0;
    const double vu = integ([&](double u) { return (u - mu) * (u - mu) * weight(u) * perp(u).first; }) / z0;
    const double w2 = integ([&](double u) { return weight(u) * perp(u).second; }) / z0;

    Vec e = Vec::Zero(d_);
    if (hn > 0.0)
      e = h / hn;
    else
      e[0] = 1.0;
    PosteriorMoments pm;
    pm.method = PosteriorMethod::closed_form;
    pm.mean = mu * e;
    const Mat eet = e * e.transpose();
    pm.cov = vu * eet + (w2 / k) * (Mat::Identity(d_, d_) - eet);
    pm.drift = (pm.mean - x) / s;
    pm.drift_jacobian = pm.cov / (s * s) - Mat::Identity(d_, d_) / s;
    double log_perp_const;
    if (tau == 0.0)
      log_perp_const = 0.5 * k * std::log(kPi) - std::lgamma(0.5 * k + 1.0);
    else
      log_perp_const = 0.5 * k * std::log(2.0 * kPi / tau);
    const double log_int = std::log(z0) + log_perp_const;
    pm.log_mass = 0.5 * d_ * kLogTwoPi - log_volume_ - 0.5 * d_ * (kLogTwoPi + std::log(s)) -
                  0.5 * (x.norm() - peak) * (x.norm() - peak) / s + 0.5 * peak * peak + log_int;
    return pm;
  }

  bool has_sampler() const override { return true; }
  Vec sample(Rng& rng) const override {
    Vec z = rng.normal_vector(d_);
    return z.normalized() * (r_ * std::pow(rng.uniform(), 1.0 / d_));
  }

 private:
  double r_;
  int d_;
  double log_volume_;
};

// ----------------------------------------------------------------- mixture

class MixtureModel final : public MeasureModel {
 public:
  explicit MixtureModel(MixtureSpec spec) : spec_(std::move(spec)) {
    for (double w : spec_.weights) log_w_.push_back(std::log(w));
  }

  int dim() const override { return static_cast<int>(spec_.atoms.front().size()); }

  std::vector<double> log_terms(const Vec& y, double s) const {
    std::vector<double> t(spec_.atoms.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = log_w_[i] + y.dot(spec_.atoms[i]) - 0.5 * (1.0 - s) * spec_.atoms[i].squaredNorm();
    return t;
  }
  // Normalized weights and their log-sum-exp.
  std::pair<std::vector<double>, double> weights(const Vec& y, double s) const {
    auto t = log_terms(y, s);
    const double lse = log_sum_exp(t);
    for (auto& v : t) v = std::exp(v - lse);
    return {t, lse};
  }

  double log_f(const Vec& y) const override { return log_sum_exp(log_terms(y, 0.0)); }
  Vec grad_log_f(const Vec& y) const override {
    auto [w, lse] = weights(y, 0.0);
    Vec g = Vec::Zero(dim());
    for (std::size_t i = 0; i < w.size(); ++i) g += w[i] * spec_.atoms[i];
    return g;
  }
  bool contains(const Vec&) const override { return true; }

  std::optional<PosteriorMoments> closed_form_posterior(double s, const Vec& x) const override {
    const int d = dim();
    auto [w, lse] = weights(x, s);
    Vec zbar = Vec::Zero(d);
    for (std::size_t i = 0; i < w.size(); ++i) zbar += w[i] * spec_.atoms[i];
    Mat cz = Mat::Zero(d, d);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Vec dz = spec_.atoms[i] - zbar;
      cz += w[i] * dz * dz.transpose();
    }
    PosteriorMoments pm;
    pm.method = PosteriorMethod::closed_form;
    pm.mean = x + s * zbar;
    pm.cov = s * Mat::Identity(d, d) + s * s * cz;
    pm.log_mass = lse;
    pm.drift = zbar;
    pm.drift_jacobian = cz;
    return pm;
  }

  bool samples_posterior() const override { return true; }
  Vec sample_posterior(double s, const Vec& x, std::span<const double> noise) const override {
    const int d = dim();
    auto [w, lse] = weights(x, s);
    const std::size_t i = pick(w, normal_cdf(noise[d]));
    Vec z(d);
    for (int j = 0; j < d; ++j) z[j] = noise[j];
    return x + s * spec_.atoms[i] + std::sqrt(s) * z;
  }
  std::optional<double> posterior_log_density(double s, double x, double y) const override {
    auto [w, lse] = weights(Vec::Constant(1, x), s);
    std::vector<double> t(w.size());
    const double sd = std::sqrt(s);
    for (std::size_t i = 0; i < w.size(); ++i)
      t[i] = std::log(w[i]) + normal_log_pdf((y - x - s * spec_.atoms[i][0]) / sd) - std::log(sd);
    return log_sum_exp(t);
  }

  bool has_sampler() const override { return true; }
  Vec sample(Rng& rng) const override {
    const std::size_t i = pick(spec_.weights, rng.uniform());
    return spec_.atoms[i] + rng.normal_vector(dim());
  }

  bool has_cdf() const override { return dim() == 1; }
  double cdf(double x) const override {
    double c = 0.0;
    for (std::size_t i = 0; i < spec_.atoms.size(); ++i) c += spec_.weights[i] * normal_cdf(x - spec_.atoms[i][0]);
    return c;
  }
  double sf(double x) const override {
    double c = 0.0;
    for (std::size_t i = 0; i < spec_.atoms.size(); ++i) c += spec_.weights[i] * normal_sf(x - spec_.atoms[i][0]);
    return c;
  }
  double pdf(double x) const override {
    double c = 0.0;
    for (std::size_t i = 0; i < spec_.atoms.size(); ++i) c += spec_.weights[i] * normal_pdf(x - spec_.atoms[i][0]);
    return c;
  }

 private:
  static std::size_t pick(const std::vector<double>& w, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return w.size() - 1;
  }

  MixtureSpec spec_;
  std::vector<double> log_w_;
};

// ----------------------------------------------------------------- product

class ProductModel final : public MeasureModel {
 public:
  explicit ProductModel(std::vector<std::shared_ptr<const MeasureModel>> f) : f_(std::move(f)) {}

  int dim() const override { return static_cast<int>(f_.size()); }
  double log_f(const Vec& y) const override {
    double acc = 0.0;
    for (int i = 0; i < dim(); ++i) acc += f_[i]->log_f(Vec::Constant(1, y[i]));
    return acc;
  }
  Vec grad_log_f(const Vec& y) const override {
    Vec g(dim());
    for (int i = 0; i < dim(); ++i) g[i] = f_[i]->grad_log_f(Vec::Constant(1, y[i]))[0];
    return g;
  }
  bool contains(const Vec& y) const override {
    for (int i = 0; i < dim(); ++i)
      if (!f_[i]->contains(Vec::Constant(1, y[i]))) return false;
    return true;
  }

  std::optional<PosteriorMoments> closed_form_posterior(double s, const Vec& x) const override {
    const int d = dim();
    PosteriorMoments pm;
    pm.method = PosteriorMethod::closed_form;
    pm.mean.resize(d);
    pm.drift.resize(d);
    pm.cov = Mat::Zero(d, d);
    pm.drift_jacobian = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      auto c = f_[i]->closed_form_posterior(s, Vec::Constant(1, x[i]));
      if (!c) return std::nullopt;
      pm.mean[i] = c->mean[0];
      pm.drift[i] = c->drift[0];
      pm.cov(i, i) = c->cov(0, 0);
      pm.drift_jacobian(i, i) = c->drift_jacobian(0, 0);
      pm.log_mass += c->log_mass;
    }
    return pm;
  }

  int posterior_noise_dim() const override { return 2 * dim(); }
  bool samples_posterior() const override {
    return std::all_of(f_.begin(), f_.end(), [](auto& f) { return f->samples_posterior(); });
  }
  Vec sample_posterior(double s, const Vec& x, std::span<const double> noise) const override {
    // Factor i consumes noise[i] and noise[d + i].
    const int d = dim();
    Vec out(d);
    for (int i = 0; i < d; ++i) {
      const std::array<double, 2> z{noise[i], noise[d + i]};
      out[i] = f_[i]->sample_posterior(s, Vec::Constant(1, x[i]), z)[0];
    }
    return out;
  }

  bool has_sampler() const override {
    return std::all_of(f_.begin(), f_.end(), [](auto& f) { return f->has_sampler(); });
  }
  Vec sample(Rng& rng) const override {
    Vec out(dim());
    for (int i = 0; i < dim(); ++i) out[i] = f_[i]->sample(rng)[0];
    return out;
  }

  bool has_cdf() const override { return dim() == 1 && f_[0]->has_cdf(); }
  double cdf(double x) const override { return f_[0]->cdf(x); }
  double sf(double x) const override { return f_[0]->sf(x); }
  double pdf(double x) const override { return f_[0]->pdf(x); }
  double quantile(double u) const override { return f_[0]->quantile(u); }
  std::pair<double, double> support_1d() const override { return f_[0]->support_1d(); }

 private:
  std::vector<std::shared_ptr<const MeasureModel>> f_;
};

// ------------------------------------------------------------------ custom

class CustomModel final : public MeasureModel {
 public:
  CustomModel(int d, std::function<double(const Vec&)> lf, std::function<Vec(const Vec&)> g)
      : d_(d), lf_(std::move(lf)), g_(std::move(g)) {}
  int dim() const override { return d_; }
  double log_f(const Vec& y) const override { return lf_(y); }
  Vec grad_log_f(const Vec& y) const override { return g_(y); }

 private:
  int d_;
  std::function<double(const Vec&)> lf_;
  std::function<Vec(const Vec&)> g_;
};

}  // namespace

// ------------------------------------------------------------- public API

double MixtureSpec::radius() const {
  double r = 0.0;
  for (const auto& z : atoms) r = std::max(r, z.norm());
  return r;
}

void MixtureSpec::validate() const {
  if (atoms.empty()) throw InvalidInput("mixture: empty atom list");
  if (weights.size() != atoms.size()) throw InvalidInput("mixture: weights and atoms differ in length");
  const auto d = atoms.front().size();
  if (d == 0) throw InvalidInput("mixture: zero-dimensional atoms");
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (static_cast<std::size_t>(atoms[i].size()) != static_cast<std::size_t>(d))
      throw InvalidInput("mixture: atoms of different dimension");
    if (!(weights[i] >= 0.0)) throw InvalidInput("mixture: negative weight");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("mixture: weights do not sum to 1");
}

TargetMeasure::TargetMeasure(std::shared_ptr<const MeasureModel> model, double kappa, double diam,
                             std::string label)
    : model_(std::move(model)), kappa_(kappa), diam_(diam), label_(std::move(label)) {}

TargetMeasure make_gaussian(const Vec& mean, const Mat& cov) {
  if (cov.rows() != cov.cols() || cov.rows() != mean.size() || mean.size() == 0)
    throw InvalidInput("gaussian: dimension mismatch");
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw InvalidInput("gaussian: covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  if (es.eigenvalues().minCoeff() <= 0.0) throw InvalidInput("gaussian: covariance is not positive definite");
  auto model = std::make_shared<GaussianModel>(mean, cov);
  return TargetMeasure(model, 1.0 / es.eigenvalues().maxCoeff(), kInf, "gaussian");
}

TargetMeasure make_standard_gaussian(int d) {
  if (d < 1) throw InvalidInput("gaussian: dimension must be positive");
  return make_gaussian(Vec::Zero(d), Mat::Identity(d, d));
}

double truncated_gaussian_normalizer(double sigma) { return 0.5 * std::sqrt(sigma / (1.0 + sigma)); }

TargetMeasure make_truncated_gaussian(double sigma) {
  if (!(sigma >= 1.0) || !std::isfinite(sigma)) throw InvalidInput("truncated_gaussian: sigma must be >= 1");
  return TargetMeasure(std::make_shared<TruncatedGaussianModel>(sigma), 1.0 + 1.0 / sigma, kInf,
                       "truncated_gaussian");
}

TargetMeasure make_uniform_interval(double S, double lower) {
  if (!(S > 0.0) || !std::isfinite(S) || !std::isfinite(lower))
    throw InvalidInput("uniform_interval: S must be positive and finite");
  return TargetMeasure(std::make_shared<UniformIntervalModel>(lower, S), 0.0, S, "uniform_interval");
}

TargetMeasure make_uniform_ball(double S, int d) {
  if (!(S > 0.0) || !std::isfinite(S)) throw InvalidInput("uniform_ball: S must be positive and finite");
  if (d < 1) throw InvalidInput("uniform_ball: dimension must be positive");
  if (d == 1) return TargetMeasure(make_uniform_interval(S, -0.5 * S).model_ptr(), 0.0, S, "uniform_ball");
  return TargetMeasure(std::make_shared<UniformBallModel>(0.5 * S, d), 0.0, S, "uniform_ball");
}

TargetMeasure make_gaussian_mixture(const MixtureSpec& spec) {
  spec.validate();
  TargetMeasure m(std::make_shared<MixtureModel>(spec), -kInf, kInf, "gaussian_mixture");
  m.set_mixture_radius(spec.radius());
  return m;
}

TargetMeasure make_product(const std::vector<TargetMeasure>& factors) {
  if (factors.empty()) throw InvalidInput("product: no factors");
  std::vector<std::shared_ptr<const MeasureModel>> models;
  double kappa = kInf, diam2 = 0.0;
  for (const auto& f : factors) {
    if (f.dim() != 1) throw InvalidInput("product: factors must be one-dimensional");
    models.push_back(f.model_ptr());
    kappa = std::min(kappa, f.kappa());
    diam2 += f.diam() * f.diam();
  }
  return TargetMeasure(std::make_shared<ProductModel>(std::move(models)), kappa, std::sqrt(diam2), "product");
}

TargetMeasure make_isotropic_uniform(int d) {
  if (d < 1) throw InvalidInput("isotropic_uniform: dimension must be positive");
  const double r = std::sqrt(3.0);
  std::vector<TargetMeasure> f(d, make_uniform_interval(2.0 * r, -r));
  auto m = make_product(f);
  return TargetMeasure(m.model_ptr(), m.kappa(), m.diam(), "isotropic_uniform");
}

TargetMeasure make_custom(int d, std::function<double(const Vec&)> log_f,
                          std::function<Vec(const Vec&)> grad_log_f, double kappa, double diam,
                          std::string label) {
  if (d < 1) throw InvalidInput("custom: dimension must be positive");
  if (!log_f || !grad_log_f) throw InvalidInput("custom: log_f and grad_log_f are required");
  return TargetMeasure(std::make_shared<CustomModel>(d, std::move(log_f), std::move(grad_log_f)), kappa, diam,
                       std::move(label));
}

namespace {

template <class F>
double integrate_support(const TargetMeasure& m, F fn) {
  namespace bq = boost::math::quadrature;
  auto [lo, hi] = m.model().support_1d();
  if (std::isfinite(lo) && std::isfinite(hi)) {
    bq::tanh_sinh<double> ts;
    return ts.integrate(fn, lo, hi, 1e-13);
  }
  if (std::isfinite(lo)) {
    bq::exp_sinh<double> es;
    return es.integrate([&](double u) { return fn(lo + u); }, 0.0, kInf, 1e-13);
  }
  if (std::isfinite(hi)) {
    bq::exp_sinh<double> es;
    return es.integrate([&](double u) { return fn(hi - u); }, 0.0, kInf, 1e-13);
  }
  bq::sinh_sinh<double> ss;
  return ss.integrate(fn, 1e-13);
}

}  // namespace

std::pair<double, double> moments_1d(const TargetMeasure& m) {
  if (m.dim() != 1 || !m.has_cdf()) throw InvalidInput("moments_1d: needs a 1D target with density");
  const double mean = integrate_support(m, [&](double y) { return y * m.pdf(y); });
  const double var = integrate_support(m, [&](double y) { return (y - mean) * (y - mean) * m.pdf(y); });
  return {mean, var};
}

double relative_entropy(const TargetMeasure& m) {
  if (m.label() == "gaussian") {
    // grad log f(y) = (I - C^{-1}) y + C^{-1} a is affine; recover (a, C) from d+1 probes.
    const int d = m.dim();
    const Vec g0 = m.grad_log_f(Vec::Zero(d));
    Mat A(d, d);
    for (int j = 0; j < d; ++j) A.col(j) = m.grad_log_f(Vec::Unit(d, j)) - g0;
    const Mat cov = (Mat::Identity(d, d) - A).inverse();
    const Vec a = cov * g0;
    const double logdet = std::log(cov.determinant());
    return 0.5 * (cov.trace() + a.squaredNorm() - d - logdet);
  }
  if (m.dim() != 1 || !m.has_cdf()) throw InvalidInput("relative_entropy: needs a Gaussian or a 1D target");
  return integrate_support(m, [&](double y) {
    const double p = m.pdf(y);
    if (p == 0.0) return 0.0;
    return p * m.log_f(Vec::Constant(1, y));
  });
}

}  // namespace bmt
