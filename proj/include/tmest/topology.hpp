#ifndef TMEST_TOPOLOGY_HPP
#define TMEST_TOPOLOGY_HPP

#include <Eigen/SparseCore>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace tmest {

using NodeIndex = std::size_t;
using LinkIndex = std::size_t;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Link {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  double weight = 1.0;
  std::optional<double> capacity_mbps;
};

/// Link description by node name, as it appears in a topology file.
struct NamedLink {
  std::string src;
  std::string dst;
  double weight = 1.0;
  std::optional<double> capacity_mbps;
};

/// Directed weighted graph. Nodes named in a link list get dense indices in
/// sorted-name order; links keep their input order, which is also the row
/// order of every routing matrix built from this topology.
class Topology {
 public:
  explicit Topology(const std::vector<NamedLink>& links);
  Topology(std::vector<std::string> node_names, std::vector<Link> links);

  std::size_t node_count() const { return names_.size(); }
  std::size_t link_count() const { return links_.size(); }

  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkIndex i) const { return links_.at(i); }
  const std::vector<LinkIndex>& out_links(NodeIndex v) const {
    return out_.at(v);
  }

  const std::string& node_name(NodeIndex v) const { return names_.at(v); }
  const std::vector<std::string>& node_names() const { return names_; }
  std::optional<NodeIndex> find_node(const std::string& name) const;
  std::optional<LinkIndex> find_link(NodeIndex src, NodeIndex dst) const;

 private:
  void validate_and_index();

  std::vector<std::string> names_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkIndex>> out_;
  std::unordered_map<std::string, NodeIndex> by_name_;
  std::unordered_map<std::uint64_t, LinkIndex> by_endpoints_;
};

struct OdPair {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  friend bool operator==(const OdPair&, const OdPair&) = default;
};

/// Ordered OD pairs; position in the list is the column index of the
/// routing matrix and of every traffic vector aligned with it.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::vector<OdPair> pairs, std::size_t node_count);

  /// All n(n-1) ordered pairs, source-major.
  static SupportSet all_pairs(std::size_t node_count);

  std::size_t size() const { return pairs_.size(); }
  const OdPair& operator[](std::size_t j) const { return pairs_[j]; }
  const std::vector<OdPair>& pairs() const { return pairs_; }
  std::optional<std::size_t> column_of(const OdPair& pair) const;
  std::size_t node_count() const { return node_count_; }

 private:
  std::vector<OdPair> pairs_;
  std::size_t node_count_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

struct ShortestPathTree {
  NodeIndex source = 0;
  /// +infinity for unreachable nodes.
  std::vector<double> distance;
  /// For each node, the links (u -> v) with dist(u) + w = dist(v).
  std::vector<std::vector<LinkIndex>> predecessor_links;
};

/// Dijkstra from `source`. Equal-cost comparisons use a relative tolerance
/// of 1e-12 so that integer-like weights produce the expected ties.
ShortestPathTree shortest_paths(const Topology& topo, NodeIndex source);

enum class RoutingMode { ShortestPath, Ecmp };

const char* to_string(RoutingMode mode);
RoutingMode parse_routing_mode(const std::string& text);

/// m x p fraction-of-demand matrix: entry (i, j) is the share of pair j's
/// traffic carried by link i.
class RoutingMatrix {
 public:
  RoutingMatrix(SparseRowMatrix entries, std::vector<Link> row_links,
                SupportSet support, RoutingMode mode);

  const SparseRowMatrix& matrix() const { return entries_; }
  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  const std::vector<Link>& row_links() const { return row_links_; }
  const SupportSet& support() const { return support_; }
  RoutingMode mode() const { return mode_; }

 private:
  SparseRowMatrix entries_;
  std::vector<Link> row_links_;
  SupportSet support_;
  RoutingMode mode_;
};

/// Single-path mode follows the lexicographically smallest shortest path
/// (compared as sequences of dense node indices). ECMP mode splits the flow
/// at every node equally across its shortest-path next hops.
RoutingMatrix build_routing_matrix(const Topology& topo,
                                   const SupportSet& support,
                                   RoutingMode mode);

Topology read_topology_csv(const std::filesystem::path& path);
SupportSet read_support_csv(const std::filesystem::path& path,
                            const Topology& topo);

}  // namespace tmest

#endif  // TMEST_TOPOLOGY_HPP
