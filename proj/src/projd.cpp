#include "tmest/projd.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace tmest {

const char* to_string(RowOrder order) {
  return order == RowOrder::Randomized ? "random" : "cyclic";
}

RowOrder parse_row_order(const std::string& text) {
  if (text == "cyclic") return RowOrder::Cyclic;
  if (text == "random" || text == "randomized") return RowOrder::Randomized;
  throw Error(ErrorCode::InvalidInput, "unknown row order '" + text + "'");
}

SnapResult snap_to_distribution(const Eigen::VectorXd& x,
                                const SparseRowMatrix& a,
                                const Eigen::VectorXd& b,
                                const NormalizedCdf& target, int retries,
                                Rng& rng) {
  const auto p = x.size();
  if (p < 1) {
    throw Error(ErrorCode::InvalidInput, "cannot snap an empty vector");
  }
  if (retries < 1) {
    throw Error(ErrorCode::InvalidInput, "retries must be at least 1");
  }
  if (a.cols() != p || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "snap: shape mismatch");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return x[i] < x[j]; });

  std::optional<SnapResult> best;
  Eigen::VectorXd best_layout;
  Eigen::VectorXd layout(p);
  for (int r = 0; r < retries; ++r) {
    const auto y = target.sample_sorted(static_cast<std::size_t>(p), rng);
    for (Eigen::Index k = 0; k < p; ++k) {
      layout[order[static_cast<std::size_t>(k)]] = y[static_cast<std::size_t>(k)];
    }
    double lambda = 0.0;
    try {
      lambda = optimal_lambda(a, layout, b);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateCandidate) throw;
      continue;
    }
    const double d = deviation(a, layout, b, lambda);
    if (!best || d < best->report.deviation) {
      best_layout = layout;
      best.emplace(SnapResult{TrafficVector::zero(0),
                              SnapReport{lambda, d, static_cast<std::size_t>(r)}});
    }
  }
  if (!best) {
    throw Error(ErrorCode::DegenerateCandidate,
                "all " + std::to_string(retries) + " snap candidates have A y = 0");
  }
  best->x = TrafficVector(best->report.lambda * best_layout);
  return std::move(*best);
}

ProjDResult proj_d_estimate(const SparseRowMatrix& a, const Eigen::VectorXd& b,
                            const NormalizedCdf& target, const ProjDConfig& config) {
  if (config.cycles < 1 || config.inner_cycles < 1 || config.retries < 1 ||
      !(config.tolerance > 0.0) || config.effective_polish_cycles() < 0) {
    throw Error(ErrorCode::InvalidInput,
                "Proj-D needs cycles, inner cycles and retries >= 1, "
                "tolerance > 0 and polish cycles >= 0");
  }
  if (a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "A rows differ from b length");
  }
  if ((b.array() < 0.0).any() || !b.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "link loads must be finite and nonnegative");
  }

  const Eigen::Index m = a.rows();
  std::vector<double> norms(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    norms[static_cast<std::size_t>(i)] = a.row(i).squaredNorm();
    if (norms[static_cast<std::size_t>(i)] == 0.0 && b[i] != 0.0) {
      throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i) +
                                          " is all zero but its load is nonzero");
    }
  }

  Rng rng(config.seed);
  std::optional<std::discrete_distribution<Eigen::Index>> pick;
  if (config.row_order == RowOrder::Randomized && m > 0) {
    pick.emplace(norms.begin(), norms.end());
  }

  ProjDResult result{TrafficVector::zero(0), {}};
  auto& diag = result.diagnostics;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.cols());
  double rel = detail::relative_residual(a, x, b);

  const auto sweeps = [&](int count) {
    for (int c = 0; c < count && rel > config.tolerance; ++c) {
      const Eigen::VectorXd before = x;
      for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index i = pick ? (*pick)(rng) : k;
        const double n2 = norms[static_cast<std::size_t>(i)];
        if (n2 == 0.0) continue;
        detail::project_onto_row(x, a, i, b[i], n2, true);
      }
      rel = detail::relative_residual(a, x, b);
      diag.residual_trace.push_back(rel);
      diag.change_trace.push_back((x - before).norm() /
                                  std::max(x.norm(), 1e-300));
    }
  };

  for (int k = 0; k < config.cycles; ++k) {
    sweeps(config.inner_cycles);
    auto snapped = snap_to_distribution(x, a, b, target, config.retries, rng);
    x = snapped.x.values();
    diag.snaps.push_back(snapped.report);
    rel = detail::relative_residual(a, x, b);
  }
  sweeps(config.effective_polish_cycles());

  diag.final_relative_residual = rel;
  result.estimate = TrafficVector(x.cwiseMax(0.0));
  const auto normalized = normalize_positive(
      std::span<const double>(result.estimate.values().data(),
                              static_cast<std::size_t>(x.size())));
  if (!normalized.empty()) diag.final_ks = ks_distance(normalized, target);
  return result;
}

ProjDResult proj_d_estimate(const RoutingMatrix& a, const LinkLoadVector& b,
                            const NormalizedCdf& target, const ProjDConfig& config) {
  return proj_d_estimate(a.matrix(), b.values(), target, config);
}

}  // namespace tmest
