#include "tmest/eval.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "tmest/csv.hpp"
#include "tmest/error.hpp"

namespace tmest {
namespace {

struct MaskedSums {
  double abs_err = 0.0;
  double sq_err = 0.0;
  double abs_truth = 0.0;
  std::size_t count = 0;
};

MaskedSums masked_sums(const TrafficVector& truth, const TrafficVector& est,
                       Mask mask) {
  if (truth.size() != est.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "truth has " + std::to_string(truth.size()) + " demands, estimate " +
                    std::to_string(est.size()));
  }
  MaskedSums s;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    if (mask == Mask::NonzeroTruth && truth[j] == 0.0) continue;
    const double e = truth[j] - est[j];
    s.abs_err += std::abs(e);
    s.sq_err += e * e;
    s.abs_truth += truth[j];
    ++s.count;
  }
  return s;
}

std::string link_label(const Topology& topo, NodeIndex s, NodeIndex d) {
  return topo.node_name(s) + "->" + topo.node_name(d);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

double nmae(const TrafficVector& truth, const TrafficVector& est, Mask mask) {
  const auto s = masked_sums(truth, est, mask);
  if (!(s.abs_truth > 0.0)) {
    throw Error(ErrorCode::ZeroTruth, "NMAE undefined: truth is zero on the mask");
  }
  return s.abs_err / s.abs_truth;
}

double rmse(const TrafficVector& truth, const TrafficVector& est, Mask mask) {
  const auto s = masked_sums(truth, est, mask);
  if (s.count == 0) {
    throw Error(ErrorCode::EmptyMask, "RMSE undefined: empty mask");
  }
  return std::sqrt(s.sq_err / static_cast<double>(s.count));
}

Estimator make_projd_estimator(NormalizedCdf target, ProjDConfig config) {
  return [target = std::move(target), config](const RoutingMatrix& a,
                                              const LinkLoadVector& b,
                                              std::uint64_t seed) {
    auto c = config;
    c.seed = seed;
    return proj_d_estimate(a, b, target, c).estimate;
  };
}

Estimator make_gan_estimator(std::shared_ptr<const GeneratorNet> net,
                             GanEstimateConfig config) {
  return [net = std::move(net), config](const RoutingMatrix& a,
                                        const LinkLoadVector& b, std::uint64_t seed) {
    auto c = config;
    c.seed = seed;
    return gan_estimate(*net, a, b, c).estimate;
  };
}

EvalReport score(const RoutingMatrix& a, const std::vector<TrafficVector>& truths,
                 const std::vector<TrafficVector>& estimates,
                 const NormalizedCdf& target) {
  if (truths.size() != estimates.size()) {
    throw Error(ErrorCode::DimensionMismatch, "truth and estimate counts differ");
  }
  if (truths.empty()) {
    throw Error(ErrorCode::InvalidInput, "nothing to score");
  }
  EvalReport report;
  MaskedSums pooled;
  double res_sq = 0.0;
  double load_sq = 0.0;
  std::vector<double> pooled_normalized;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    const auto& x = truths[k];
    const auto& est = estimates[k];
    const auto s = masked_sums(x, est, Mask::NonzeroTruth);
    TmScore tm;
    tm.index = k;
    tm.nmae = nmae(x, est);
    tm.rmse_mbps = rmse(x, est);

    const auto b = simulate_loads(a, x);
    const auto r = residual(a, est, b);
    tm.relative_link_residual = r.relative;
    res_sq += r.l2 * r.l2;
    load_sq += b.values().squaredNorm();

    const auto normalized = normalize_positive(
        std::span<const double>(est.values().data(), static_cast<std::size_t>(est.size())));
    if (!normalized.empty()) {
      tm.ks_to_target = ks_distance(normalized, target);
      pooled_normalized.insert(pooled_normalized.end(), normalized.begin(),
                               normalized.end());
    }

    pooled.abs_err += s.abs_err;
    pooled.sq_err += s.sq_err;
    pooled.abs_truth += s.abs_truth;
    pooled.count += s.count;
    report.rmse_mbps_mean += tm.rmse_mbps;
    report.nmae_mean += tm.nmae;
    report.per_tm.push_back(tm);
  }
  const auto n = static_cast<double>(truths.size());
  report.rmse_mbps_mean /= n;
  report.nmae_mean /= n;
  report.rmse_mbps = std::sqrt(pooled.sq_err / static_cast<double>(pooled.count));
  report.nmae = pooled.abs_err / pooled.abs_truth;
  report.relative_link_residual = load_sq > 0.0 ? std::sqrt(res_sq / load_sq) : 0.0;
  if (!pooled_normalized.empty()) {
    report.ks_to_target = ks_distance(pooled_normalized, target);
  }
  return report;
}

ExperimentResult run_experiment(const RoutingMatrix& a,
                                const std::vector<TrafficVector>& tms,
                                const NormalizedCdf& target, const Estimator& estimator,
                                const ExperimentOptions& options) {
  const auto count = tms.size();
  ExperimentResult result;
  result.loads.resize(count);
  result.estimates.resize(count);
  std::vector<std::exception_ptr> errors(count);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) {
      try {
        result.loads[k] = simulate_loads(a, tms[k]);
        result.estimates[k] = estimator(a, result.loads[k], options.base_seed + k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < std::min(jobs, count); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  result.report = score(a, tms, result.estimates, target);
  return result;
}

std::string report_to_json(const EvalReport& report) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  json doc;
  doc["rmse_mbps"] = report.rmse_mbps;
  doc["nmae"] = report.nmae;
  doc["rmse_mbps_mean"] = report.rmse_mbps_mean;
  doc["nmae_mean"] = report.nmae_mean;
  doc["ks_to_target"] = opt(report.ks_to_target);
  doc["relative_link_residual"] = report.relative_link_residual;
  doc["tm_count"] = report.per_tm.size();
  json per_tm = json::array();
  for (const auto& tm : report.per_tm) {
    per_tm.push_back({{"index", tm.index},
                      {"rmse_mbps", tm.rmse_mbps},
                      {"nmae", tm.nmae},
                      {"ks_to_target", opt(tm.ks_to_target)},
                      {"relative_link_residual", tm.relative_link_residual}});
  }
  doc["per_tm"] = std::move(per_tm);
  return doc.dump(2);
}

void write_plot_data(const std::filesystem::path& dir, const Topology& topo,
                     const RoutingMatrix& a, const std::vector<TrafficVector>& truths,
                     const std::vector<TrafficVector>& estimates,
                     const NormalizedCdf& target, const PlotOptions& options) {
  if (truths.size() != estimates.size()) {
    throw Error(ErrorCode::DimensionMismatch, "truth and estimate counts differ");
  }
  std::filesystem::create_directories(dir);

  const auto batch_sorted = [](const std::vector<TrafficVector>& tms) {
    double top = 0.0;
    for (const auto& x : tms) top = std::max(top, x.size() ? x.values().maxCoeff() : 0.0);
    std::vector<double> values;
    for (const auto& x : tms) {
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] > 0.0) values.push_back(x[j] / top);
      }
    }
    std::sort(values.begin(), values.end());
    return values;
  };
  const auto truth_sorted = batch_sorted(truths);
  const auto est_sorted = batch_sorted(estimates);

  {
    auto out = open_out(dir / "cdf.csv");
    csv::write_row(out, {"value", "cdf_truth", "cdf_est", "cdf_target"});
    const auto points = std::max<std::size_t>(options.cdf_points, 2);
    for (std::size_t i = 0; i < points; ++i) {
      const double v = static_cast<double>(i) / static_cast<double>(points - 1);
      csv::write_row(out, {csv::format_double(v),
                           csv::format_double(empirical_cdf(truth_sorted, v)),
                           csv::format_double(empirical_cdf(est_sorted, v)),
                           csv::format_double(target(v))});
    }
  }

  const auto shown = std::min(options.scatter_tms, truths.size());
  const auto& support = a.support();
  {
    auto out = open_out(dir / "demands.csv");
    csv::write_row(out, {"tm", "pair", "truth", "est"});
    for (std::size_t k = 0; k < shown; ++k) {
      for (std::size_t j = 0; j < support.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        csv::write_row(out, {std::to_string(k),
                             link_label(topo, support[j].src, support[j].dst),
                             csv::format_double(truths[k][jj]),
                             csv::format_double(estimates[k][jj])});
      }
    }
  }
  {
    auto out = open_out(dir / "links.csv");
    csv::write_row(out, {"tm", "link", "given", "fitted"});
    for (std::size_t k = 0; k < shown; ++k) {
      const auto given = simulate_loads(a, truths[k]);
      const auto fitted = simulate_loads(a, estimates[k]);
      for (std::size_t i = 0; i < a.row_links().size(); ++i) {
        const auto& l = a.row_links()[i];
        const auto ii = static_cast<Eigen::Index>(i);
        csv::write_row(out, {std::to_string(k), link_label(topo, l.src, l.dst),
                             csv::format_double(given[ii]),
                             csv::format_double(fitted[ii])});
      }
    }
  }
}

}  // namespace tmest
