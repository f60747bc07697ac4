#ifndef TMEST_EVAL_HPP
#define TMEST_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmest/dist.hpp"
#include "tmest/gan.hpp"
#include "tmest/projd.hpp"
#include "tmest/tm.hpp"

namespace tmest {

enum class Mask { NonzeroTruth, All };

/// ||x - x_hat||_1 / ||x||_1 over the masked entries.
double nmae(const TrafficVector& truth, const TrafficVector& est,
            Mask mask = Mask::NonzeroTruth);
/// sqrt(mean (x - x_hat)^2) over the masked entries, in Mbps.
double rmse(const TrafficVector& truth, const TrafficVector& est,
            Mask mask = Mask::NonzeroTruth);

/// Maps observed loads to a demand estimate; `seed` is per TM.
using Estimator = std::function<TrafficVector(const RoutingMatrix&, const LinkLoadVector&,
                                              std::uint64_t seed)>;

Estimator make_projd_estimator(NormalizedCdf target, ProjDConfig config);
Estimator make_gan_estimator(std::shared_ptr<const GeneratorNet> net,
                             GanEstimateConfig config);

struct TmScore {
  std::size_t index = 0;
  double rmse_mbps = 0.0;
  double nmae = 0.0;
  std::optional<double> ks_to_target;
  double relative_link_residual = 0.0;
};

struct EvalReport {
  // Pooled over every masked demand / link of every TM.
  double rmse_mbps = 0.0;
  double nmae = 0.0;
  // Plain averages of the per-TM values.
  double rmse_mbps_mean = 0.0;
  double nmae_mean = 0.0;
  std::optional<double> ks_to_target;
  double relative_link_residual = 0.0;
  std::vector<TmScore> per_tm;
};

struct ExperimentOptions {
  std::uint64_t base_seed = 0;
  int jobs = 1;
};

struct ExperimentResult {
  EvalReport report;
  std::vector<LinkLoadVector> loads;
  std::vector<TrafficVector> estimates;
};

/// For every TM: simulate its loads, estimate from them with seed
/// base_seed + index, score. TMs run on `jobs` threads; results do not
/// depend on the thread count.
ExperimentResult run_experiment(const RoutingMatrix& a,
                                const std::vector<TrafficVector>& tms,
                                const NormalizedCdf& target, const Estimator& estimator,
                                const ExperimentOptions& options);

/// Scores given estimates against truth without running an estimator.
EvalReport score(const RoutingMatrix& a, const std::vector<TrafficVector>& truths,
                 const std::vector<TrafficVector>& estimates, const NormalizedCdf& target);

std::string report_to_json(const EvalReport& report);

struct PlotOptions {
  std::size_t scatter_tms = 10;
  std::size_t cdf_points = 1001;
};

/// Writes cdf.csv, demands.csv and links.csv into `dir`. CDF series are
/// scaled by the batch-wide maximum of truth and estimate respectively.
void write_plot_data(const std::filesystem::path& dir, const Topology& topo,
                     const RoutingMatrix& a, const std::vector<TrafficVector>& truths,
                     const std::vector<TrafficVector>& estimates,
                     const NormalizedCdf& target, const PlotOptions& options = {});

}  // namespace tmest

#endif  // TMEST_EVAL_HPP
