#ifndef TMEST_DIST_HPP
#define TMEST_DIST_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tmest/rng.hpp"

namespace tmest {

/// Target cdf on [0, 1] for demands scaled so the largest equals 1. Either
/// the power law y^alpha or the step function of an observed sample.
class NormalizedCdf {
 public:
  static NormalizedCdf power_law(double alpha);
  /// Zero entries are dropped; the rest are divided by their maximum.
  static NormalizedCdf tabulated(std::span<const double> observations);

  bool is_power_law() const { return points_.empty(); }
  double alpha() const { return alpha_; }
  /// Sorted scaled points (tabulated only); the last one is 1.
  const std::vector<double>& points() const { return points_; }

  /// G(y), right-continuous.
  double operator()(double y) const;
  /// lim G(z) as z -> y from below.
  double left_limit(double y) const;

  /// `count` ascending values whose normalized empirical cdf follows this
  /// target; the largest is exactly 1.
  std::vector<double> sample_sorted(std::size_t count, Rng& rng) const;

 private:
  double alpha_ = 1.0;
  std::vector<double> points_;
};

/// Distribution of the raw (unnormalized) iid draws.
class SourceDistribution {
 public:
  static SourceDistribution beta_alpha_one(double alpha);
  static SourceDistribution uniform();

  double cdf(double x) const;
  double pdf(double x) const;
  double quantile(double u) const;
  /// ln Q(u) and F(exp(log_x)), kept in log space so tiny quantiles of
  /// Beta(alpha, 1) with small alpha do not underflow.
  double log_quantile(double u) const;
  double cdf_from_log(double log_x) const;

 private:
  explicit SourceDistribution(double alpha) : alpha_(alpha) {}
  double alpha_;  // Uniform(0,1) is Beta(1,1)
};

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`; throws
/// Error(QuadratureFailure) if the recursion bottoms out first.
double integrate_adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double tol,
                                  int max_depth = 48);

/// cdf of X_i / max_j X_j for a non-maximal draw among n iid draws from
/// `src`: n * int F(y t) F(t)^(n-2) f(t) dt, evaluated after substituting
/// u = F(t) so the integrand stays bounded.
double normalized_cdf_of_max_ratio(const SourceDistribution& src, int n,
                                   double y, double tol = 1e-8);

/// Inverse-cdf draw U^(1/alpha) from Beta(alpha, 1).
double beta_alpha_one_from_uniform(double u, double alpha);
double beta_alpha_one_sample(double alpha, Rng& rng);

/// n iid Beta(alpha, 1) draws divided by their maximum, in draw order.
/// The maximum entry is exactly 1 and every entry is in (0, 1].
std::vector<double> sample_normalized_power_law(std::size_t n, double alpha,
                                                Rng& rng);

/// Closed-form MLE of alpha for density alpha y^(alpha-1) on the positive
/// demands scaled by their maximum.
double fit_alpha_mle(std::span<const double> demands);
/// Pooled fit over several TMs, each scaled by its own maximum.
double fit_alpha_mle(const std::vector<std::vector<double>>& tms);

/// Positive entries divided by their max, ascending. Empty if none positive.
std::vector<double> normalize_positive(std::span<const double> demands);

/// Fraction of `sorted` that is <= z.
double empirical_cdf(std::span<const double> sorted, double z);

/// sup_y |F_n(y) - G(y)| for samples in [0, 1].
double ks_distance(std::span<const double> samples, const NormalizedCdf& target);

}  // namespace tmest

#endif  // TMEST_DIST_HPP
