#ifndef TMEST_TM_HPP
#define TMEST_TM_HPP

#include <Eigen/Core>
#include <filesystem>
#include <ostream>

#include "tmest/topology.hpp"

namespace tmest {

/// Finite, elementwise nonnegative vector. The tag keeps demand vectors
/// (indexed by OD pair) and load vectors (indexed by link) apart.
template <typename Tag>
class NonnegativeVector {
 public:
  NonnegativeVector() = default;
  explicit NonnegativeVector(Eigen::VectorXd values);
  static NonnegativeVector zero(Eigen::Index size) {
    return NonnegativeVector(Eigen::VectorXd::Zero(size));
  }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Eigen::VectorXd values_;
};

struct TrafficTag;
struct LinkLoadTag;
/// Demands in Mbps, aligned with a SupportSet.
using TrafficVector = NonnegativeVector<TrafficTag>;
/// Link loads in Mbps, aligned with routing-matrix rows.
using LinkLoadVector = NonnegativeVector<LinkLoadTag>;

extern template class NonnegativeVector<TrafficTag>;
extern template class NonnegativeVector<LinkLoadTag>;

/// b = A x.
LinkLoadVector simulate_loads(const RoutingMatrix& a, const TrafficVector& x);

struct Residual {
  double l2 = 0.0;
  double relative = 0.0;
};

/// ||Ax - b|| and ||Ax - b|| / ||b||. With b = 0 the relative residual is 0
/// if the fit is exact and undefined (InvalidInput) otherwise.
Residual residual(const SparseRowMatrix& a, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& b);
Residual residual(const RoutingMatrix& a, const TrafficVector& x,
                  const LinkLoadVector& b);

/// TM file: `src,dst,demand_mbps`. Support pairs missing from the file are
/// zero; rows for pairs outside the support are rejected.
TrafficVector read_tm_csv(const std::filesystem::path& path,
                          const Topology& topo, const SupportSet& support);
void write_tm_csv(std::ostream& out, const Topology& topo,
                  const SupportSet& support, const TrafficVector& x);

/// Link-load file: `src,dst,load_mbps`, one row per topology link.
LinkLoadVector read_loads_csv(const std::filesystem::path& path,
                              const Topology& topo);
void write_loads_csv(std::ostream& out, const Topology& topo,
                     const LinkLoadVector& b);

}  // namespace tmest

#endif  // TMEST_TM_HPP
