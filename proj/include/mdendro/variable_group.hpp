#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linkage.hpp"
#include "numeric.hpp"
#include "proximity.hpp"

namespace mdendro {

// Merge tree whose nodes may have any arity. Each internal node carries the
// heterogeneity band [band_lower, band_upper]: the smallest and largest
// distance between the clusters it merged. Children are ordered by smallest
// leaf index, which makes the tree a canonical form by construction.
struct Multidendrogram {
  struct Node {
    int leaf = -1;  // leaf index, -1 for internal nodes
    double band_lower = 0.0;
    double band_upper = 0.0;
    int leaf_count = 1;
    std::vector<int> children;
  };

  std::vector<Node> nodes;
  int root = -1;
  std::vector<std::string> labels;
  int precision = 0;
  Measure measure = Measure::Distance;

  bool is_leaf(int idx) const { return nodes[idx].children.empty(); }

  // Scalar fusion value: the band edge where the merge happened. Distances
  // fuse at the lower edge; weights fuse at the upper edge.
  double fusion(int idx) const {
    if (is_leaf(idx)) return 0.0;
    return measure == Measure::Weight ? nodes[idx].band_upper : nodes[idx].band_lower;
  }

  int min_leaf(int idx) const {
    while (!is_leaf(idx)) idx = nodes[idx].children.front();
    return nodes[idx].leaf;
  }
};

// One step of the agglomeration: the live clusters, their rounded distance
// table, and the minimum distance awaiting the next merge.
struct AgglomerationState {
  struct Cluster {
    std::vector<int> leaves;
    int node = -1;  // index into the tree arena being built
  };

  std::vector<Cluster> clusters;
  SymMatrix dist;
  double d_lower = 0.0;
  std::optional<double> d_next;
};

struct IterationRecord {
  double d_lower = 0.0;
  std::optional<double> d_next;  // minimum after the merge; absent on the last step
  int tied_pairs = 0;            // cluster pairs sitting exactly at d_lower
  // Nodes formed this iteration with their band upper edge, in the internal
  // (possibly negated) distance scale.
  std::vector<std::pair<int, double>> formed;
};

struct ClusterTrace {
  std::vector<IterationRecord> iterations;
  Measure measure = Measure::Distance;
};

// A merged group whose internal spread reaches beyond the next fusion level:
// band_upper > d_next, both in the internal distance scale.
struct ReversalEvent {
  int node = -1;
  double band_upper = 0.0;
  double d_next = 0.0;
};

struct VariableGroupResult {
  Multidendrogram tree;
  ClusterTrace trace;
  std::vector<ReversalEvent> reversals;
  int tie_iterations = 0;  // iterations whose minimum was shared by several pairs
  int band_nodes = 0;      // internal nodes that merged more than two clusters
};

// Groups the clusters sitting at the current minimum distance: vertices are
// cluster indices, edges join pairs at exactly d_lower, and each returned
// component is one supercluster to merge. Components of size one are
// clusters untouched this iteration. Components are sorted by smallest
// member, members ascending.
inline std::vector<std::vector<std::size_t>> tie_groups(const AgglomerationState& state) {
  const std::size_t m = state.clusters.size();
  std::vector<std::size_t> parent(m);
  for (std::size_t i = 0; i < m; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (state.dist(i, j) == state.d_lower) parent[find(i)] = find(j);

  std::vector<std::vector<std::size_t>> components(m);
  for (std::size_t i = 0; i < m; ++i) components[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& component : components)
    if (!component.empty()) out.push_back(std::move(component));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

// Heterogeneity band of one tie component: minimum and maximum distance
// between its members. The minimum must be the current d_lower; anything
// else means the component was not built from the tie graph.
inline std::pair<double, double> agglomeration_interval(const std::vector<std::size_t>& component,
                                                        const AgglomerationState& state) {
  assert(component.size() >= 2);
  double lo = state.dist(component[0], component[1]);
  double hi = lo;
  for (std::size_t a = 0; a < component.size(); ++a)
    for (std::size_t b = a + 1; b < component.size(); ++b) {
      const double d = state.dist(component[a], component[b]);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  if (lo != state.d_lower)
    throw std::logic_error("tie component whose closest pair is not at the fusion minimum");
  return {lo, hi};
}

namespace detail {

inline double table_minimum(const SymMatrix& dist) {
  const std::size_t m = dist.size();
  double d = dist(0, 1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) d = std::min(d, dist(i, j));
  return d;
}

inline GroupDistanceInput build_group_input(const AgglomerationState& state,
                                            const std::vector<std::size_t>& members_i,
                                            const std::vector<std::size_t>& members_j) {
  GroupDistanceInput in;
  for (std::size_t a : members_i) in.sizes_i.push_back(state.clusters[a].leaves.size());
  for (std::size_t b : members_j) in.sizes_j.push_back(state.clusters[b].leaves.size());
  in.cross.reserve(members_i.size() * members_j.size());
  for (std::size_t a : members_i)
    for (std::size_t b : members_j) in.cross.push_back(state.dist(a, b));
  for (std::size_t a = 0; a < members_i.size(); ++a)
    for (std::size_t b = a + 1; b < members_i.size(); ++b)
      in.within_i.push_back(state.dist(members_i[a], members_i[b]));
  for (std::size_t a = 0; a < members_j.size(); ++a)
    for (std::size_t b = a + 1; b < members_j.size(); ++b)
      in.within_j.push_back(state.dist(members_j[a], members_j[b]));
  return in;
}

}  // namespace detail

// Scans a trace for merged groups whose band upper edge exceeds the next
// fusion minimum. Events are reported in the internal distance scale the
// trace was recorded in.
inline std::vector<ReversalEvent> detect_band_reversals(const ClusterTrace& trace) {
  std::vector<ReversalEvent> events;
  for (const auto& record : trace.iterations) {
    if (!record.d_next) continue;
    for (const auto& [node, band_upper] : record.formed)
      if (band_upper > *record.d_next) events.push_back({node, band_upper, *record.d_next});
  }
  return events;
}

// Variable-group agglomerative clustering. Each iteration merges every tie
// component at the current minimum distance simultaneously, records its band,
// recomputes the distance table with the group recurrence (rounded back to
// the working precision), and repeats until one cluster remains. The result
// is independent of input order and needs no tie-breaking policy. Weight
// data is clustered on negated values; bands are mapped back at the end.
inline VariableGroupResult variable_group_cluster(const ProximityData& data, Method method) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("need at least two nodes to cluster");
  const bool negate = data.measure == Measure::Weight;
  const int precision = data.precision;

  VariableGroupResult result;
  Multidendrogram& tree = result.tree;
  tree.labels = data.labels;
  tree.precision = precision;
  tree.measure = data.measure;
  tree.nodes.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    Multidendrogram::Node leaf;
    leaf.leaf = static_cast<int>(i);
    tree.nodes.push_back(std::move(leaf));
  }

  AgglomerationState state;
  state.clusters.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    state.clusters[i] = {{static_cast<int>(i)}, static_cast<int>(i)};
  state.dist = SymMatrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = data.values(i, j);
      state.dist.set(i, j, round_to(negate ? -v : v, precision));
    }

  result.trace.measure = data.measure;

  while (state.clusters.size() > 1) {
    state.d_lower = detail::table_minimum(state.dist);

    IterationRecord record;
    record.d_lower = state.d_lower;
    for (std::size_t i = 0; i < state.clusters.size(); ++i)
      for (std::size_t j = i + 1; j < state.clusters.size(); ++j)
        if (state.dist(i, j) == state.d_lower) ++record.tied_pairs;
    if (record.tied_pairs > 1) ++result.tie_iterations;

    const auto components = tie_groups(state);

    std::vector<AgglomerationState::Cluster> next;
    std::vector<std::vector<std::size_t>> next_members;  // old table indices per new cluster
    next.reserve(components.size());
    for (const auto& component : components) {
      if (component.size() == 1) {
        next.push_back(state.clusters[component[0]]);
        next_members.push_back(component);
        continue;
      }
      const auto [lo, hi] = agglomeration_interval(component, state);

      Multidendrogram::Node node;
      node.leaf = -1;
      node.band_lower = lo;
      node.band_upper = hi;
      node.leaf_count = 0;
      for (std::size_t member : component) {
        node.leaf_count += static_cast<int>(state.clusters[member].leaves.size());
        node.children.push_back(state.clusters[member].node);
      }
      std::sort(node.children.begin(), node.children.end(),
                [&](int a, int b) { return tree.min_leaf(a) < tree.min_leaf(b); });
      const int node_idx = static_cast<int>(tree.nodes.size());
      if (node.children.size() > 2) ++result.band_nodes;
      tree.nodes.push_back(std::move(node));

      AgglomerationState::Cluster merged;
      merged.node = node_idx;
      for (std::size_t member : component)
        merged.leaves.insert(merged.leaves.end(), state.clusters[member].leaves.begin(),
                             state.clusters[member].leaves.end());
      std::sort(merged.leaves.begin(), merged.leaves.end());
      next.push_back(std::move(merged));
      next_members.push_back(component);

      record.formed.emplace_back(node_idx, hi);
    }

    SymMatrix next_dist(next.size());
    for (std::size_t x = 0; x < next.size(); ++x)
      for (std::size_t y = x + 1; y < next.size(); ++y) {
        if (next_members[x].size() == 1 && next_members[y].size() == 1) {
          next_dist.set(x, y, state.dist(next_members[x][0], next_members[y][0]));
        } else {
          const auto in = detail::build_group_input(state, next_members[x], next_members[y]);
          next_dist.set(x, y, round_to(group_distance(method, in), precision));
        }
      }

    state.clusters = std::move(next);
    state.dist = std::move(next_dist);
    state.d_next = state.clusters.size() > 1
                       ? std::optional<double>(detail::table_minimum(state.dist))
                       : std::nullopt;
    record.d_next = state.d_next;
    result.trace.iterations.push_back(std::move(record));
  }

  tree.root = state.clusters[0].node;
  result.reversals = detect_band_reversals(result.trace);
  if (negate) {
    for (auto& node : tree.nodes)
      if (node.leaf < 0) {
        const double lo = node.band_lower, hi = node.band_upper;
        node.band_lower = -hi;
        node.band_upper = -lo;
      }
    for (auto& event : result.reversals) {
      event.band_upper = -event.band_upper;
      event.d_next = -event.d_next;
    }
  }
  return result;
}

}  // namespace mdendro
