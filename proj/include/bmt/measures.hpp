#pragma once

#include "bmt/core.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bmt {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class PosteriorMethod { closed_form, gauss_hermite, monte_carlo };

const char* to_string(PosteriorMethod m);

/// Moments of p^{x,s}, the probability with density proportional to
/// f(y) phi^{x,s}(y), with s = 1 - t. `drift` and `drift_jacobian` are
/// (mean - x)/s and cov/s^2 - Id/s, evaluated in a cancellation-free form
/// where the model has one.
struct PosteriorMoments {
  Vec mean;
  Mat cov;
  double log_mass = 0.0;  // log P_s f(x)
  PosteriorMethod method = PosteriorMethod::closed_form;
  Vec drift;
  Mat drift_jacobian;
};

/// Analytic description of a target p = f * gamma_d. Implementations are
/// immutable after construction.
class MeasureModel {
 public:
  virtual ~MeasureModel() = default;

  virtual int dim() const = 0;
  virtual double log_f(const Vec& x) const = 0;
  virtual Vec grad_log_f(const Vec& x) const = 0;
  virtual bool contains(const Vec& x) const;

  /// Posterior p^{x,s} in closed form, if the model has one.
  virtual std::optional<PosteriorMoments> closed_form_posterior(double s, const Vec& x) const;
  /// Exact draw from p^{x,s} driven by posterior_noise_dim() standard normals.
  virtual bool samples_posterior() const { return false; }
  virtual int posterior_noise_dim() const { return dim() + 1; }
  virtual Vec sample_posterior(double s, const Vec& x, std::span<const double> noise) const;
  /// 1D only: log density of p^{x,s} at y.
  virtual std::optional<double> posterior_log_density(double s, double x, double y) const;

  virtual bool has_sampler() const { return false; }
  virtual Vec sample(Rng& rng) const;

  // One-dimensional distribution data. pdf is the Lebesgue density of p.
  virtual bool has_cdf() const { return false; }
  virtual double cdf(double x) const;
  virtual double sf(double x) const { return 1.0 - cdf(x); }
  virtual double pdf(double x) const;
  virtual double quantile(double u) const;
  /// Support of a 1D target, possibly infinite at either end.
  virtual std::pair<double, double> support_1d() const { return {-kInf, kInf}; }
};

struct MixtureSpec {
  std::vector<Vec> atoms;
  std::vector<double> weights;

  double radius() const;
  void validate() const;
};

/// Target measure with the constants the bounds need. kappa is the
/// log-concavity parameter (-inf when unused), diam the support diameter.
class TargetMeasure {
 public:
  TargetMeasure(std::shared_ptr<const MeasureModel> model, double kappa, double diam, std::string label);

  int dim() const { return model_->dim(); }
  double log_f(const Vec& x) const { return model_->log_f(x); }
  Vec grad_log_f(const Vec& x) const { return model_->grad_log_f(x); }
  bool support_contains(const Vec& x) const { return model_->contains(x); }
  double kappa() const { return kappa_; }
  double diam() const { return diam_; }
  const std::string& label() const { return label_; }
  const MeasureModel& model() const { return *model_; }
  std::shared_ptr<const MeasureModel> model_ptr() const { return model_; }

  /// Support radius of the mixing measure for Gaussian mixtures.
  std::optional<double> mixture_radius() const { return mixture_radius_; }
  void set_mixture_radius(double r) { mixture_radius_ = r; }

  bool has_sampler() const { return model_->has_sampler(); }
  Vec sample(Rng& rng) const { return model_->sample(rng); }
  bool has_cdf() const { return model_->has_cdf(); }
  double cdf(double x) const { return model_->cdf(x); }
  double sf(double x) const { return model_->sf(x); }
  double pdf(double x) const { return model_->pdf(x); }
  double quantile(double u) const { return model_->quantile(u); }

 private:
  std::shared_ptr<const MeasureModel> model_;
  double kappa_;
  double diam_;
  std::string label_;
  std::optional<double> mixture_radius_;
};

TargetMeasure make_gaussian(const Vec& mean, const Mat& cov);
TargetMeasure make_standard_gaussian(int d);
TargetMeasure make_truncated_gaussian(double sigma);
/// Uniform on [lower, lower + S].
TargetMeasure make_uniform_interval(double S, double lower = 0.0);
/// Uniform on the closed ball of diameter S centered at 0.
TargetMeasure make_uniform_ball(double S, int d);
TargetMeasure make_gaussian_mixture(const MixtureSpec& spec);
/// Product of one-dimensional targets. kappa is the minimum, diam the
/// Euclidean combination of the factors.
TargetMeasure make_product(const std::vector<TargetMeasure>& factors);
/// Uniform on [-sqrt 3, sqrt 3]^d (mean 0, covariance Id).
TargetMeasure make_isotropic_uniform(int d);
/// Target given only by log f; posteriors by quadrature or sampling.
TargetMeasure make_custom(int d, std::function<double(const Vec&)> log_f,
                          std::function<Vec(const Vec&)> grad_log_f, double kappa, double diam,
                          std::string label);

/// Truncated-Gaussian normalizer Z(sigma) = sqrt(sigma/(1+sigma))/2.
double truncated_gaussian_normalizer(double sigma);

/// H(p | gamma_d) = E_p[log f]. Closed form for Gaussians, 1D quadrature
/// otherwise.
double relative_entropy(const TargetMeasure& m);

/// Mean and variance of a 1D target by quadrature of its density.
std::pair<double, double> moments_1d(const TargetMeasure& m);

}  // namespace bmt
