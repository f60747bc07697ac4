#include "tmest/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tmest/error.hpp"

namespace tmest {
namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidInput,
                "alpha must be positive and finite, got " + std::to_string(alpha));
  }
}

struct SimpsonNode {
  double a, b, fa, fm, fb, whole;
};

double simpson_recurse(const std::function<double(double)>& f,
                       const SimpsonNode& node, double tol, int depth) {
  const double m = 0.5 * (node.a + node.b);
  const double lm = 0.5 * (node.a + m);
  const double rm = 0.5 * (m + node.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - node.a) / 6.0 * (node.fa + 4.0 * flm + node.fm);
  const double right = (node.b - m) / 6.0 * (node.fm + 4.0 * frm + node.fb);
  const double delta = left + right - node.whole;
  if (std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  if (depth <= 0 || !std::isfinite(delta)) {
    throw Error(ErrorCode::QuadratureFailure,
                "adaptive Simpson did not reach tolerance on [" +
                    std::to_string(node.a) + ", " + std::to_string(node.b) + "]");
  }
  return simpson_recurse(f, {node.a, m, node.fa, flm, node.fm, left}, tol / 2.0,
                         depth - 1) +
         simpson_recurse(f, {m, node.b, node.fm, frm, node.fb, right}, tol / 2.0,
                         depth - 1);
}

}  // namespace

NormalizedCdf NormalizedCdf::power_law(double alpha) {
  require_alpha(alpha);
  NormalizedCdf g;
  g.alpha_ = alpha;
  return g;
}

NormalizedCdf NormalizedCdf::tabulated(std::span<const double> observations) {
  NormalizedCdf g;
  g.points_ = normalize_positive(observations);
  if (g.points_.empty()) {
    throw Error(ErrorCode::InsufficientData,
                "tabulated cdf needs at least one positive observation");
  }
  return g;
}

double NormalizedCdf::operator()(double y) const {
  if (y < 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  if (is_power_law()) return std::pow(y, alpha_);
  return empirical_cdf(points_, y);
}

double NormalizedCdf::left_limit(double y) const {
  if (y <= 0.0) return 0.0;
  if (y > 1.0) return 1.0;
  if (is_power_law()) return std::pow(y, alpha_);
  const auto below = std::lower_bound(points_.begin(), points_.end(), y);
  return static_cast<double>(below - points_.begin()) /
         static_cast<double>(points_.size());
}

std::vector<double> NormalizedCdf::sample_sorted(std::size_t count,
                                                 Rng& rng) const {
  std::vector<double> y;
  if (is_power_law()) {
    y = sample_normalized_power_law(count, alpha_, rng);
  } else {
    y.resize(count);
    const auto n = points_.size();
    for (auto& v : y) {
      const double u = rng.uniform_open_closed();
      auto k = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n)));
      v = points_[std::clamp<std::size_t>(k, 1, n) - 1];
    }
    const double top = count ? *std::max_element(y.begin(), y.end()) : 1.0;
    for (auto& v : y) v /= top;
  }
  std::sort(y.begin(), y.end());
  return y;
}

SourceDistribution SourceDistribution::beta_alpha_one(double alpha) {
  require_alpha(alpha);
  return SourceDistribution(alpha);
}

SourceDistribution SourceDistribution::uniform() { return SourceDistribution(1.0); }

double SourceDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return std::pow(x, alpha_);
}

double SourceDistribution::pdf(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  return alpha_ * std::pow(x, alpha_ - 1.0);
}

double SourceDistribution::quantile(double u) const {
  return std::pow(std::clamp(u, 0.0, 1.0), 1.0 / alpha_);
}

double SourceDistribution::log_quantile(double u) const {
  return std::log(std::clamp(u, 0.0, 1.0)) / alpha_;
}

double SourceDistribution::cdf_from_log(double log_x) const {
  if (log_x >= 0.0) return 1.0;
  return std::exp(alpha_ * log_x);
}

double integrate_adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double tol, int max_depth) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, {a, b, fa, fm, fb, whole}, tol, max_depth);
}

double normalized_cdf_of_max_ratio(const SourceDistribution& src, int n,
                                   double y, double tol) {
  if (n < 2) {
    throw Error(ErrorCode::InvalidInput, "n must be at least 2");
  }
  if (!(y >= 0.0 && y <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "y must lie in [0, 1]");
  }
  const double log_y = std::log(y);
  const double nn = static_cast<double>(n);
  // With u = F(t): n * int_0^1 F(y Q(u)) u^(n-2) du.
  const auto integrand = [&](double u) {
    const double inner = src.cdf_from_log(log_y + src.log_quantile(u));
    return nn * inner * std::pow(u, nn - 2.0);
  };
  return integrate_adaptive_simpson(integrand, 0.0, 1.0, tol);
}

double beta_alpha_one_from_uniform(double u, double alpha) {
  require_alpha(alpha);
  return std::pow(u, 1.0 / alpha);
}

double beta_alpha_one_sample(double alpha, Rng& rng) {
  return beta_alpha_one_from_uniform(rng.uniform_open_closed(), alpha);
}

std::vector<double> sample_normalized_power_law(std::size_t n, double alpha,
                                                Rng& rng) {
  require_alpha(alpha);
  // ln X_i = ln(U_i) / alpha; the ratio to the max is formed in log space
  // because U^(1/alpha) underflows for small alpha.
  std::vector<double> out(n);
  double top = -std::numeric_limits<double>::infinity();
  for (auto& v : out) {
    v = std::log(rng.uniform_open_closed()) / alpha;
    top = std::max(top, v);
  }
  constexpr double floor = std::numeric_limits<double>::denorm_min();
  for (auto& v : out) {
    v = std::max(std::exp(v - top), floor);
  }
  return out;
}

std::vector<double> normalize_positive(std::span<const double> demands) {
  std::vector<double> y;
  y.reserve(demands.size());
  for (const double d : demands) {
    if (!std::isfinite(d) || d < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  "demands must be finite and nonnegative");
    }
    if (d > 0.0) y.push_back(d);
  }
  if (y.empty()) return y;
  const double top = *std::max_element(y.begin(), y.end());
  for (auto& v : y) v /= top;
  std::sort(y.begin(), y.end());
  return y;
}

double fit_alpha_mle(std::span<const double> demands) {
  return fit_alpha_mle(std::vector<std::vector<double>>{
      std::vector<double>(demands.begin(), demands.end())});
}

double fit_alpha_mle(const std::vector<std::vector<double>>& tms) {
  std::size_t k = 0;
  double log_sum = 0.0;
  for (const auto& tm : tms) {
    const auto y = normalize_positive(tm);
    k += y.size();
    for (const double v : y) log_sum += std::log(v);
  }
  if (k < 2) {
    throw Error(ErrorCode::InsufficientData,
                "need at least 2 positive demands to fit alpha, got " +
                    std::to_string(k));
  }
  if (log_sum == 0.0) {
    throw Error(ErrorCode::DegenerateSample,
                "all positive demands equal their maximum; alpha is unbounded");
  }
  return -static_cast<double>(k) / log_sum;
}

double empirical_cdf(std::span<const double> sorted, double z) {
  if (sorted.empty()) return 0.0;
  const auto upto = std::upper_bound(sorted.begin(), sorted.end(), z);
  return static_cast<double>(upto - sorted.begin()) /
         static_cast<double>(sorted.size());
}

double ks_distance(std::span<const double> samples, const NormalizedCdf& target) {
  if (samples.empty()) {
    throw Error(ErrorCode::InvalidInput, "ks_distance needs at least one sample");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0.0 || sorted.back() > 1.0) {
    throw Error(ErrorCode::InvalidInput, "ks_distance samples must lie in [0, 1]");
  }

  // Both cdfs are piecewise constant or monotone between breakpoints, so
  // the supremum is attained at a breakpoint value or left limit.
  std::vector<double> breaks(sorted);
  breaks.insert(breaks.end(), target.points().begin(), target.points().end());
  breaks.push_back(0.0);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (const double z : breaks) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), z);
    const auto upto = std::upper_bound(below, sorted.end(), z);
    const double f_left = static_cast<double>(below - sorted.begin()) / n;
    const double f_at = static_cast<double>(upto - sorted.begin()) / n;
    sup = std::max({sup, std::abs(f_at - target(z)),
                    std::abs(f_left - target.left_limit(z))});
  }
  return sup;
}

}  // namespace tmest
