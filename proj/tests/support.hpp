// Test-only helpers: random instance generators and oracles that do not
// share code paths with the library implementations they check.
#ifndef TMEST_TESTS_SUPPORT_HPP
#define TMEST_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tmest/dist.hpp"
#include "tmest/gan.hpp"
#include "tmest/tm.hpp"
#include "tmest/topology.hpp"

namespace tmest::testing {

inline std::string node_label(std::size_t i) { return "n" + std::to_string(100 + i); }

/// Connected random digraph: a bidirectional ring plus `extra` random
/// bidirectional chords, integer weights in [1, max_weight].
inline Topology random_topology(std::size_t n, std::size_t extra, int max_weight,
                                std::mt19937_64& gen) {
  std::uniform_int_distribution<int> weight(1, max_weight);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<NamedLink> links;
  const auto add_both = [&](std::size_t a, std::size_t b) {
    if (a == b || used.count({a, b})) return false;
    used.insert({a, b});
    used.insert({b, a});
    links.push_back({node_label(a), node_label(b), double(weight(gen)), std::nullopt});
    links.push_back({node_label(b), node_label(a), double(weight(gen)), std::nullopt});
    return true;
  };
  for (std::size_t i = 0; i < n; ++i) add_both(i, (i + 1) % n);
  std::size_t added = 0;
  while (added < extra) {
    if (add_both(node(gen), node(gen))) ++added;
  }
  return Topology(links);
}

inline SupportSet random_support(const Topology& topo, std::size_t p,
                                 std::mt19937_64& gen) {
  auto all = SupportSet::all_pairs(topo.node_count()).pairs();
  std::shuffle(all.begin(), all.end(), gen);
  all.resize(std::min(p, all.size()));
  return SupportSet(all, topo.node_count());
}

inline std::vector<double> bellman_ford(const Topology& topo, NodeIndex src) {
  std::vector<double> d(topo.node_count(), std::numeric_limits<double>::infinity());
  d[src] = 0.0;
  for (std::size_t round = 0; round + 1 < topo.node_count(); ++round) {
    for (const auto& l : topo.links()) {
      if (d[l.src] + l.weight < d[l.dst]) d[l.dst] = d[l.src] + l.weight;
    }
  }
  return d;
}

/// Every minimum-cost simple path from s to d, as node sequences, by DFS.
inline std::vector<std::vector<NodeIndex>> enumerate_shortest_paths(const Topology& topo,
                                                                    NodeIndex s,
                                                                    NodeIndex d) {
  std::vector<std::pair<double, std::vector<NodeIndex>>> found;
  std::vector<NodeIndex> path{s};
  std::vector<char> on_path(topo.node_count(), 0);
  on_path[s] = 1;
  std::function<void(NodeIndex, double)> dfs = [&](NodeIndex v, double cost) {
    if (v == d) {
      found.emplace_back(cost, path);
      return;
    }
    for (const auto& l : topo.links()) {
      if (l.src != v || on_path[l.dst]) continue;
      on_path[l.dst] = 1;
      path.push_back(l.dst);
      dfs(l.dst, cost + l.weight);
      path.pop_back();
      on_path[l.dst] = 0;
    }
  };
  dfs(s, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : found) best = std::min(best, f.first);
  std::vector<std::vector<NodeIndex>> out;
  for (const auto& f : found) {
    if (std::abs(f.first - best) < 1e-9) out.push_back(f.second);
  }
  return out;
}

/// Link fractions under per-node equal splitting, from explicit path
/// enumeration: a path's share is the product over its nodes of
/// 1 / (number of distinct next hops used by shortest paths at that node).
inline std::map<std::pair<NodeIndex, NodeIndex>, double> ecmp_oracle(const Topology& topo,
                                                                      NodeIndex s,
                                                                      NodeIndex d) {
  const auto paths = enumerate_shortest_paths(topo, s, d);
  std::map<NodeIndex, std::set<NodeIndex>> next;
  for (const auto& p : paths) {
    for (std::size_t k = 0; k + 1 < p.size(); ++k) next[p[k]].insert(p[k + 1]);
  }
  std::map<std::pair<NodeIndex, NodeIndex>, double> share;
  for (const auto& p : paths) {
    double w = 1.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) w /= double(next[p[k]].size());
    for (std::size_t k = 0; k + 1 < p.size(); ++k) share[{p[k], p[k + 1]}] += w;
  }
  return share;
}

inline Eigen::VectorXd naive_matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& x) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    b[i] = acc;
  }
  return b;
}

/// Generator forward pass written with explicit loops.
inline std::vector<double> naive_forward(const GeneratorNet& net,
                                         const std::vector<double>& latent) {
  std::vector<double> a = latent;
  const auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& w = layers[k].weights;
    std::vector<double> z(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double acc = layers[k].bias[r];
      for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * a[std::size_t(c)];
      const bool relu = (k + 1 == layers.size() ? net.output_activation()
                                                : net.hidden_activation()) ==
                        Activation::Relu;
      z[std::size_t(r)] = relu && acc < 0.0 ? 0.0 : acc;
    }
    a = std::move(z);
  }
  for (auto& v : a) v *= net.scale();
  return a;
}

inline GeneratorNet random_generator(std::vector<Eigen::Index> sizes, std::mt19937_64& gen,
                                     Activation output = Activation::Relu,
                                     double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<DenseLayer<double>> layers;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer<double> l;
    l.weights = Eigen::MatrixXd::NullaryExpr(sizes[k + 1], sizes[k], [&] {
      return g(gen) / std::sqrt(double(sizes[k]));
    });
    l.bias = Eigen::VectorXd::NullaryExpr(sizes[k + 1], [&] { return 0.1 * g(gen); });
    layers.push_back(std::move(l));
  }
  return GeneratorNet(sizes.front(), std::move(layers), Activation::Relu, output, scale);
}

/// Golden-section maximization of a unimodal function on [lo, hi].
inline double golden_section_max(const std::function<double(double)>& f, double lo,
                                 double hi, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - r * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + r * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// sup |F_n - G| evaluated on a dense grid plus at every sample (both sides).
inline double ks_grid_oracle(const std::vector<double>& samples,
                             const std::function<double(double)>& cdf, int grid) {
  const auto n = double(samples.size());
  const auto fn = [&](double z, bool strict) {
    double c = 0;
    for (double s : samples) c += strict ? (s < z) : (s <= z);
    return c / n;
  };
  double sup = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double z = double(i) / grid;
    sup = std::max(sup, std::abs(fn(z, false) - cdf(z)));
  }
  for (double s : samples) {
    sup = std::max({sup, std::abs(fn(s, false) - cdf(s)), std::abs(fn(s, true) - cdf(s))});
  }
  return sup;
}

/// Random topology, random support, power-law demands scaled to `top` Mbps
/// and the loads they induce.
struct SyntheticInstance {
  Topology topo;
  RoutingMatrix a;
  TrafficVector truth;
  LinkLoadVector loads;
};

inline SyntheticInstance synthetic_instance(std::size_t nodes, std::size_t p, double alpha,
                                            double top, RoutingMode mode,
                                            std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto topo = random_topology(nodes, nodes, 10, gen);
  auto support = random_support(topo, p, gen);
  auto a = build_routing_matrix(topo, support, mode);
  Rng rng(seed);
  const auto y = sample_normalized_power_law(p, alpha, rng);
  Eigen::VectorXd x = top * Eigen::Map<const Eigen::VectorXd>(y.data(), Eigen::Index(p));
  TrafficVector truth(x);
  auto loads = simulate_loads(a, truth);
  return {std::move(topo), std::move(a), std::move(truth), std::move(loads)};
}

}  // namespace tmest::testing

#endif  // TMEST_TESTS_SUPPORT_HPP
