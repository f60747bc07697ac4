#include "tmest/tm.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "tmest/csv.hpp"
#include "tmest/error.hpp"

namespace tmest {

template <typename Tag>
NonnegativeVector<Tag>::NonnegativeVector(Eigen::VectorXd values)
    : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  "entry " + std::to_string(i) +
                      " must be finite and nonnegative, got " +
                      std::to_string(values_[i]));
    }
  }
}

template class NonnegativeVector<TrafficTag>;
template class NonnegativeVector<LinkLoadTag>;

LinkLoadVector simulate_loads(const RoutingMatrix& a, const TrafficVector& x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "routing matrix has " + std::to_string(a.cols()) +
                    " columns, traffic vector has " + std::to_string(x.size()));
  }
  Eigen::VectorXd b = a.matrix() * x.values();
  // Rounding can leave -0.0 or tiny negatives only if inputs were negative,
  // which the TrafficVector invariant rules out.
  return LinkLoadVector(std::move(b));
}

Residual residual(const SparseRowMatrix& a, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& b) {
  if (a.cols() != x.size() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "residual: A is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ", x has " +
                    std::to_string(x.size()) + ", b has " +
                    std::to_string(b.size()));
  }
  Residual r;
  r.l2 = (a * x - b).norm();
  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    r.relative = r.l2 / bnorm;
  } else if (r.l2 == 0.0) {
    r.relative = 0.0;
  } else {
    throw Error(ErrorCode::InvalidInput,
                "relative residual undefined: b = 0 but Ax != 0");
  }
  return r;
}

Residual residual(const RoutingMatrix& a, const TrafficVector& x,
                  const LinkLoadVector& b) {
  return residual(a.matrix(), x.values(), b.values());
}

TrafficVector read_tm_csv(const std::filesystem::path& path,
                          const Topology& topo, const SupportSet& support) {
  const auto name = path.string();
  const auto table = csv::read(path);
  csv::expect_header(table, {"src", "dst", "demand_mbps"}, {}, name);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(support.size()));
  std::vector<char> filled(support.size(), 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = name + ":" + std::to_string(table.lines[r]);
    const auto s = topo.find_node(row[0]);
    const auto d = topo.find_node(row[1]);
    if (!s || !d) {
      throw Error(ErrorCode::InvalidInput,
                  where + ": unknown node in pair " + row[0] + "," + row[1]);
    }
    const double demand = csv::parse_double(row[2], name, table.lines[r]);
    if (!std::isfinite(demand) || demand < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  where + ": demand must be finite and nonnegative");
    }
    const auto col = support.column_of({*s, *d});
    if (!col) {
      if (demand == 0.0) continue;
      throw Error(ErrorCode::InvalidInput, where + ": pair " + row[0] + "," +
                                               row[1] + " is not in the support set");
    }
    if (filled[*col]) {
      throw Error(ErrorCode::InvalidInput,
                  where + ": duplicate pair " + row[0] + "," + row[1]);
    }
    filled[*col] = 1;
    x[static_cast<Eigen::Index>(*col)] = demand;
  }
  return TrafficVector(std::move(x));
}

void write_tm_csv(std::ostream& out, const Topology& topo,
                  const SupportSet& support, const TrafficVector& x) {
  if (static_cast<std::size_t>(x.size()) != support.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "traffic vector length differs from support size");
  }
  csv::write_row(out, {"src", "dst", "demand_mbps"});
  for (std::size_t j = 0; j < support.size(); ++j) {
    csv::write_row(out, {topo.node_name(support[j].src),
                         topo.node_name(support[j].dst),
                         csv::format_double(x[static_cast<Eigen::Index>(j)])});
  }
}

LinkLoadVector read_loads_csv(const std::filesystem::path& path,
                              const Topology& topo) {
  const auto name = path.string();
  const auto table = csv::read(path);
  csv::expect_header(table, {"src", "dst", "load_mbps"}, {}, name);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(topo.link_count()));
  std::vector<char> filled(topo.link_count(), 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = name + ":" + std::to_string(table.lines[r]);
    const auto s = topo.find_node(row[0]);
    const auto d = topo.find_node(row[1]);
    const auto link = (s && d) ? topo.find_link(*s, *d) : std::nullopt;
    if (!link) {
      throw Error(ErrorCode::InvalidInput,
                  where + ": no topology link " + row[0] + "->" + row[1]);
    }
    if (filled[*link]) {
      throw Error(ErrorCode::InvalidInput,
                  where + ": duplicate link " + row[0] + "->" + row[1]);
    }
    const double load = csv::parse_double(row[2], name, table.lines[r]);
    if (!std::isfinite(load) || load < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  where + ": load must be finite and nonnegative");
    }
    filled[*link] = 1;
    b[static_cast<Eigen::Index>(*link)] = load;
  }
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) {
      const auto& l = topo.link(i);
      throw Error(ErrorCode::InvalidInput,
                  name + ": missing load for link " + topo.node_name(l.src) +
                      "->" + topo.node_name(l.dst));
    }
  }
  return LinkLoadVector(std::move(b));
}

void write_loads_csv(std::ostream& out, const Topology& topo,
                     const LinkLoadVector& b) {
  if (static_cast<std::size_t>(b.size()) != topo.link_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "load vector length differs from link count");
  }
  csv::write_row(out, {"src", "dst", "load_mbps"});
  for (std::size_t i = 0; i < topo.link_count(); ++i) {
    const auto& l = topo.link(i);
    csv::write_row(out, {topo.node_name(l.src), topo.node_name(l.dst),
                         csv::format_double(b[static_cast<Eigen::Index>(i)])});
  }
}

}  // namespace tmest
