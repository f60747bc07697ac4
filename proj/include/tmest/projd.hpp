#ifndef TMEST_PROJD_HPP
#define TMEST_PROJD_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "tmest/dist.hpp"
#include "tmest/error.hpp"
#include "tmest/rng.hpp"
#include "tmest/tm.hpp"

namespace tmest {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using SparseRows = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

enum class RowOrder { Cyclic, Randomized };

const char* to_string(RowOrder order);
RowOrder parse_row_order(const std::string& text);

/// Closest point to x on {z : row . z = b}; with `nonnegative`, the result
/// is additionally clipped at zero componentwise.
template <typename DerivedX, typename DerivedRow>
VectorX<typename DerivedX::Scalar> kaczmarz_project_row(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedRow>& row,
    typename DerivedX::Scalar b, bool nonnegative) {
  using Scalar = typename DerivedX::Scalar;
  if (row.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row and x differ in length");
  }
  const VectorX<Scalar> r = row.reshaped();
  const Scalar norm_sq = r.squaredNorm();
  if (norm_sq == Scalar(0)) {
    throw Error(ErrorCode::ZeroRow, "cannot project onto an all-zero row");
  }
  VectorX<Scalar> out = x.reshaped();
  out += r * ((b - r.dot(out)) / norm_sq);
  if (nonnegative) out = out.cwiseMax(Scalar(0));
  return out;
}

namespace detail {

/// In-place projection onto sparse row i. When `nonnegative`, x must already
/// be nonnegative; only the row's support can then go negative.
template <typename Scalar>
void project_onto_row(VectorX<Scalar>& x, const SparseRows<Scalar>& a,
                      Eigen::Index i, Scalar b_i, Scalar row_norm_sq,
                      bool nonnegative) {
  using It = typename SparseRows<Scalar>::InnerIterator;
  Scalar dot(0);
  for (It it(a, i); it; ++it) dot += it.value() * x[it.index()];
  const Scalar step = (b_i - dot) / row_norm_sq;
  for (It it(a, i); it; ++it) {
    Scalar& xi = x[it.index()];
    xi += step * it.value();
    if (nonnegative && xi < Scalar(0)) xi = Scalar(0);
  }
}

/// ||Ax - b|| / ||b||, with 0 for an exact fit to b = 0 and +inf otherwise.
template <typename Scalar>
Scalar relative_residual(const SparseRows<Scalar>& a, const VectorX<Scalar>& x,
                         const VectorX<Scalar>& b) {
  const Scalar r = (a * x - b).norm();
  const Scalar bn = b.norm();
  if (bn > Scalar(0)) return r / bn;
  return r == Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
}

}  // namespace detail

struct SolveOptions {
  int max_cycles = 10000;
  double tolerance = 1e-9;
  RowOrder row_order = RowOrder::Cyclic;
  bool nonnegative = false;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct SolveResult {
  VectorX<Scalar> x;
  int cycles = 0;
  Scalar relative_residual = Scalar(0);
  bool converged = false;
};

/// Sweeps of row projections (one sweep = m projections, either in row order
/// or drawn with probability proportional to ||a_i||^2) until the relative
/// residual drops to `tolerance` or `max_cycles` sweeps have run. Rows that
/// are entirely zero are skipped when their b_i is 0 and rejected with
/// Error(ZeroRow) otherwise.
template <typename Scalar>
SolveResult<Scalar> cyclic_projection_solve(
    const SparseRows<Scalar>& a, const VectorX<Scalar>& b,
    const SolveOptions& options,
    const std::optional<VectorX<Scalar>>& start = std::nullopt) {
  if (a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "A rows differ from b length");
  }
  const Eigen::Index m = a.rows();
  std::vector<Scalar> norms(static_cast<std::size_t>(m));
  std::vector<double> weights(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar n2 = a.row(i).squaredNorm();
    if (n2 == Scalar(0) && b[i] != Scalar(0)) {
      throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i) +
                                          " is all zero but its load is nonzero");
    }
    norms[static_cast<std::size_t>(i)] = n2;
    weights[static_cast<std::size_t>(i)] = static_cast<double>(n2);
  }

  SolveResult<Scalar> result;
  result.x = start ? *start : VectorX<Scalar>::Zero(a.cols());
  if (result.x.size() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "start vector length differs from p");
  }
  if (options.nonnegative) result.x = result.x.cwiseMax(Scalar(0));

  Rng rng(options.seed);
  std::optional<std::discrete_distribution<Eigen::Index>> pick;
  if (options.row_order == RowOrder::Randomized && m > 0) {
    pick.emplace(weights.begin(), weights.end());
  }

  const auto tol = static_cast<Scalar>(options.tolerance);
  result.relative_residual = detail::relative_residual(a, result.x, b);
  while (result.relative_residual > tol && result.cycles < options.max_cycles) {
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index i = pick ? (*pick)(rng) : k;
      const Scalar n2 = norms[static_cast<std::size_t>(i)];
      if (n2 == Scalar(0)) continue;
      detail::project_onto_row(result.x, a, i, b[i], n2, options.nonnegative);
    }
    ++result.cycles;
    result.relative_residual = detail::relative_residual(a, result.x, b);
  }
  result.converged = result.relative_residual <= tol;
  return result;
}

/// D(lambda) = sum_j (lambda a_j y - b_j)^2.
template <typename Scalar>
Scalar deviation(const SparseRows<Scalar>& a, const VectorX<Scalar>& y,
                 const VectorX<Scalar>& b, Scalar lambda) {
  return (lambda * (a * y) - b).squaredNorm();
}

/// Minimizer of D over lambda >= 0: (Ay . b) / ||Ay||^2, clamped at zero.
template <typename Scalar>
Scalar optimal_lambda(const SparseRows<Scalar>& a, const VectorX<Scalar>& y,
                      const VectorX<Scalar>& b) {
  if (a.cols() != y.size() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "optimal_lambda: shape mismatch");
  }
  const VectorX<Scalar> ay = a * y;
  const Scalar denom = ay.squaredNorm();
  if (denom == Scalar(0)) {
    throw Error(ErrorCode::DegenerateCandidate, "candidate has A y = 0");
  }
  const Scalar lambda = ay.dot(b) / denom;
  return lambda > Scalar(0) ? lambda : Scalar(0);
}

struct SnapReport {
  double lambda = 0.0;
  double deviation = 0.0;
  std::size_t candidate_index = 0;
};

struct SnapResult {
  TrafficVector x;
  SnapReport report;
};

/// Replaces x by lambda * y, where y is a fresh sorted draw from `target`
/// laid out in x's rank order (the k-th smallest entry of x, ties by index,
/// receives the k-th smallest y). Of `retries` candidate draws the one with
/// least deviation is kept.
SnapResult snap_to_distribution(const Eigen::VectorXd& x,
                                const SparseRowMatrix& a,
                                const Eigen::VectorXd& b,
                                const NormalizedCdf& target, int retries,
                                Rng& rng);

struct ProjDConfig {
  int cycles = 20;          // outer iterations, each ending in a snap
  int inner_cycles = 50;    // projection sweeps between snaps
  int retries = 8;          // candidate draws per snap
  RowOrder row_order = RowOrder::Cyclic;
  double tolerance = 1e-9;  // relative residual that ends a projection phase
  std::optional<int> polish_cycles;  // sweeps after the last snap; default inner_cycles
  std::uint64_t seed = 0;

  int effective_polish_cycles() const {
    return polish_cycles.value_or(inner_cycles);
  }
};

struct ProjDDiagnostics {
  /// Relative residual after every projection sweep.
  std::vector<double> residual_trace;
  /// ||x_k - x_{k-1}|| / max(||x_k||, tiny) for every sweep.
  std::vector<double> change_trace;
  std::vector<SnapReport> snaps;
  double final_relative_residual = 0.0;
  /// KS distance between the estimate's normalized positive demands and the
  /// target; empty when the estimate is identically zero.
  std::optional<double> final_ks;
};

struct ProjDResult {
  TrafficVector estimate;
  ProjDDiagnostics diagnostics;
};

ProjDResult proj_d_estimate(const SparseRowMatrix& a, const Eigen::VectorXd& b,
                            const NormalizedCdf& target, const ProjDConfig& config);
ProjDResult proj_d_estimate(const RoutingMatrix& a, const LinkLoadVector& b,
                            const NormalizedCdf& target, const ProjDConfig& config);

}  // namespace tmest

#endif  // TMEST_PROJD_HPP
