#include "tmest/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "tmest/csv.hpp"
#include "tmest/error.hpp"

namespace tmest {
namespace {

std::uint64_t pair_key(NodeIndex src, NodeIndex dst) {
  return (static_cast<std::uint64_t>(src) << 32) | static_cast<std::uint64_t>(dst);
}

bool same_distance(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

Topology::Topology(const std::vector<NamedLink>& links) {
  // Dense indices follow the sorted node names, so they do not depend on
  // the order in which links are listed.
  for (const auto& l : links) {
    for (const auto* name : {&l.src, &l.dst}) {
      if (name->empty()) {
        throw Error(ErrorCode::InvalidInput, "empty node name");
      }
      names_.push_back(*name);
    }
  }
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  for (NodeIndex v = 0; v < names_.size(); ++v) by_name_.emplace(names_[v], v);

  links_.reserve(links.size());
  for (const auto& l : links) {
    links_.push_back(
        Link{by_name_.at(l.src), by_name_.at(l.dst), l.weight, l.capacity_mbps});
  }
  validate_and_index();
}

Topology::Topology(std::vector<std::string> node_names, std::vector<Link> links)
    : names_(std::move(node_names)), links_(std::move(links)) {
  for (NodeIndex v = 0; v < names_.size(); ++v) {
    if (names_[v].empty()) {
      throw Error(ErrorCode::InvalidInput, "empty node name");
    }
    if (!by_name_.try_emplace(names_[v], v).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate node name " + names_[v]);
    }
  }
  validate_and_index();
}

void Topology::validate_and_index() {
  if (names_.size() < 2) {
    throw Error(ErrorCode::InvalidInput, "topology needs at least 2 nodes");
  }
  if (links_.empty()) {
    throw Error(ErrorCode::InvalidInput, "topology needs at least 1 link");
  }
  out_.assign(names_.size(), {});
  for (LinkIndex i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (l.src >= names_.size() || l.dst >= names_.size()) {
      throw Error(ErrorCode::InvalidInput, "link endpoint out of range");
    }
    const auto label = names_[l.src] + "->" + names_[l.dst];
    if (l.src == l.dst) {
      throw Error(ErrorCode::InvalidInput, "self-loop link " + label);
    }
    if (!(l.weight > 0.0) || !std::isfinite(l.weight)) {
      throw Error(ErrorCode::InvalidInput,
                  "link " + label + " weight must be positive and finite");
    }
    if (l.capacity_mbps && !(*l.capacity_mbps >= 0.0)) {
      throw Error(ErrorCode::InvalidInput,
                  "link " + label + " capacity must be nonnegative");
    }
    if (!by_endpoints_.try_emplace(pair_key(l.src, l.dst), i).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate link " + label);
    }
    out_[l.src].push_back(i);
  }
}

std::optional<NodeIndex> Topology::find_node(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<LinkIndex> Topology::find_link(NodeIndex src, NodeIndex dst) const {
  const auto it = by_endpoints_.find(pair_key(src, dst));
  if (it == by_endpoints_.end()) return std::nullopt;
  return it->second;
}

SupportSet::SupportSet(std::vector<OdPair> pairs, std::size_t node_count)
    : pairs_(std::move(pairs)), node_count_(node_count) {
  lookup_.reserve(pairs_.size());
  for (std::size_t j = 0; j < pairs_.size(); ++j) {
    const auto& p = pairs_[j];
    if (p.src >= node_count || p.dst >= node_count) {
      throw Error(ErrorCode::InvalidInput, "OD pair endpoint out of range");
    }
    if (p.src == p.dst) {
      throw Error(ErrorCode::InvalidInput, "OD pair with src == dst");
    }
    if (!lookup_.try_emplace(pair_key(p.src, p.dst), j).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate OD pair");
    }
  }
}

SupportSet SupportSet::all_pairs(std::size_t node_count) {
  std::vector<OdPair> pairs;
  pairs.reserve(node_count * (node_count - 1));
  for (NodeIndex s = 0; s < node_count; ++s) {
    for (NodeIndex d = 0; d < node_count; ++d) {
      if (s != d) pairs.push_back({s, d});
    }
  }
  return SupportSet(std::move(pairs), node_count);
}

std::optional<std::size_t> SupportSet::column_of(const OdPair& pair) const {
  const auto it = lookup_.find(pair_key(pair.src, pair.dst));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

ShortestPathTree shortest_paths(const Topology& topo, NodeIndex source) {
  const auto n = topo.node_count();
  if (source >= n) {
    throw Error(ErrorCode::InvalidInput, "source node out of range");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  ShortestPathTree tree;
  tree.source = source;
  tree.distance.assign(n, inf);
  tree.predecessor_links.assign(n, {});

  using Entry = std::pair<double, NodeIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  tree.distance[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > tree.distance[u]) continue;
    for (const auto li : topo.out_links(u)) {
      const auto& l = topo.link(li);
      const double nd = d + l.weight;
      if (nd < tree.distance[l.dst]) {
        tree.distance[l.dst] = nd;
        queue.emplace(nd, l.dst);
      }
    }
  }

  for (LinkIndex li = 0; li < topo.link_count(); ++li) {
    const auto& l = topo.link(li);
    const double du = tree.distance[l.src];
    if (std::isfinite(du) && l.dst != source &&
        same_distance(du + l.weight, tree.distance[l.dst])) {
      tree.predecessor_links[l.dst].push_back(li);
    }
  }
  return tree;
}

const char* to_string(RoutingMode mode) {
  return mode == RoutingMode::Ecmp ? "ecmp" : "sp";
}

RoutingMode parse_routing_mode(const std::string& text) {
  if (text == "sp" || text == "shortest-path") return RoutingMode::ShortestPath;
  if (text == "ecmp") return RoutingMode::Ecmp;
  throw Error(ErrorCode::InvalidInput, "unknown routing mode '" + text + "'");
}

RoutingMatrix::RoutingMatrix(SparseRowMatrix entries, std::vector<Link> row_links,
                             SupportSet support, RoutingMode mode)
    : entries_(std::move(entries)),
      row_links_(std::move(row_links)),
      support_(std::move(support)),
      mode_(mode) {
  if (static_cast<std::size_t>(entries_.rows()) != row_links_.size() ||
      static_cast<std::size_t>(entries_.cols()) != support_.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "routing matrix shape disagrees with its links/support");
  }
}

RoutingMatrix build_routing_matrix(const Topology& topo,
                                   const SupportSet& support,
                                   RoutingMode mode) {
  const auto n = topo.node_count();
  if (support.node_count() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "support set was built for a different node count");
  }

  // Columns grouped by source so each Dijkstra run is shared.
  std::vector<std::vector<std::size_t>> columns_by_source(n);
  for (std::size_t j = 0; j < support.size(); ++j) {
    columns_by_source[support[j].src].push_back(j);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::vector<LinkIndex>> path_out(n);
  std::vector<char> seen(n, 0);
  std::vector<double> flow(n, 0.0);
  std::vector<NodeIndex> nodes;

  for (NodeIndex s = 0; s < n; ++s) {
    if (columns_by_source[s].empty()) continue;
    const auto tree = shortest_paths(topo, s);

    for (const auto j : columns_by_source[s]) {
      const auto d = support[j].dst;
      if (!std::isfinite(tree.distance[d])) {
        throw Error(ErrorCode::UnreachablePair,
                    "no path from " + topo.node_name(s) + " to " +
                        topo.node_name(d));
      }

      // Walk the predecessor DAG back from d: every link visited lies on
      // some shortest s -> d path, and nothing else does.
      nodes.clear();
      nodes.push_back(d);
      seen[d] = 1;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        for (const auto li : tree.predecessor_links[nodes[k]]) {
          const auto u = topo.link(li).src;
          path_out[u].push_back(li);
          if (!seen[u]) {
            seen[u] = 1;
            nodes.push_back(u);
          }
        }
      }

      const auto col = static_cast<int>(j);
      if (mode == RoutingMode::ShortestPath) {
        NodeIndex cur = s;
        while (cur != d) {
          const auto& outs = path_out[cur];
          const auto best = *std::min_element(
              outs.begin(), outs.end(), [&](LinkIndex a, LinkIndex b) {
                return topo.link(a).dst < topo.link(b).dst;
              });
          triplets.emplace_back(static_cast<int>(best), col, 1.0);
          cur = topo.link(best).dst;
        }
      } else {
        std::sort(nodes.begin(), nodes.end(), [&](NodeIndex a, NodeIndex b) {
          return tree.distance[a] < tree.distance[b];
        });
        flow[s] = 1.0;
        for (const auto v : nodes) {
          const auto& outs = path_out[v];
          if (outs.empty()) continue;
          const double share = flow[v] / static_cast<double>(outs.size());
          for (const auto li : outs) {
            triplets.emplace_back(static_cast<int>(li), col, share);
            flow[topo.link(li).dst] += share;
          }
        }
      }

      for (const auto v : nodes) {
        seen[v] = 0;
        flow[v] = 0.0;
        path_out[v].clear();
      }
    }
  }

  SparseRowMatrix a(static_cast<Eigen::Index>(topo.link_count()),
                    static_cast<Eigen::Index>(support.size()));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return RoutingMatrix(std::move(a), topo.links(), support, mode);
}

Topology read_topology_csv(const std::filesystem::path& path) {
  const auto name = path.string();
  const auto table = csv::read(path);
  csv::expect_header(table, {"src", "dst", "weight"}, {"capacity"}, name);
  std::vector<NamedLink> links;
  links.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    NamedLink l;
    l.src = row[0];
    l.dst = row[1];
    l.weight = csv::parse_double(row[2], name, table.lines[r]);
    if (row.size() > 3 && !row[3].empty()) {
      l.capacity_mbps = csv::parse_double(row[3], name, table.lines[r]);
    }
    links.push_back(std::move(l));
  }
  try {
    return Topology(links);
  } catch (const Error& e) {
    throw Error(e.code(), name + ": " + e.what());
  }
}

SupportSet read_support_csv(const std::filesystem::path& path,
                            const Topology& topo) {
  const auto name = path.string();
  const auto table = csv::read(path);
  csv::expect_header(table, {"src", "dst"}, {}, name);
  std::vector<OdPair> pairs;
  pairs.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto s = topo.find_node(row[0]);
    const auto d = topo.find_node(row[1]);
    if (!s || !d) {
      throw Error(ErrorCode::InvalidInput,
                  name + ":" + std::to_string(table.lines[r]) +
                      ": unknown node in pair " + row[0] + "," + row[1]);
    }
    pairs.push_back({*s, *d});
  }
  try {
    return SupportSet(std::move(pairs), topo.node_count());
  } catch (const Error& e) {
    throw Error(e.code(), name + ": " + e.what());
  }
}

}  // namespace tmest
