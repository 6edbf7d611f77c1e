#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linkage.hpp"
#include "numeric.hpp"
#include "proximity.hpp"

namespace mdendro {

// How the classical engine breaks ties between equally close cluster pairs.
// Pairs are keyed by their (smallest leaf, smallest leaf) index pair.
struct TiePolicy {
  enum class Kind { first_index, last_index, random };

  Kind kind = Kind::first_index;
  std::uint64_t seed = 0;

  static TiePolicy first() { return {Kind::first_index, 0}; }
  static TiePolicy last() { return {Kind::last_index, 0}; }
  static TiePolicy random(std::uint64_t seed) { return {Kind::random, seed}; }
};

// Binary merge tree. Leaves sit at height 0; internal nodes carry the fusion
// value of their merge. Children are ordered by smallest leaf index.
struct Dendrogram {
  struct Node {
    int leaf = -1;  // leaf index, -1 for internal nodes
    double height = 0.0;
    int leaf_count = 1;
    std::vector<int> children;  // empty or exactly two entries
  };

  std::vector<Node> nodes;
  int root = -1;
  std::vector<std::string> labels;
  int precision = 0;
  Measure measure = Measure::Distance;

  bool is_leaf(int idx) const { return nodes[idx].children.empty(); }
  double fusion(int idx) const { return is_leaf(idx) ? 0.0 : nodes[idx].height; }
  int min_leaf(int idx) const {
    while (!is_leaf(idx)) idx = nodes[idx].children.front();
    return nodes[idx].leaf;
  }
};

struct PairGroupStats {
  int tie_iterations = 0;    // iterations that saw more than one minimum pair
  int height_reversals = 0;  // internal children fused above their parent
};

class EnumerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct PgCluster {
  std::vector<int> leaves;
  int node = -1;
  int id = 0;  // smallest original leaf index, used for tie ordering
};

inline void append_leaves(Dendrogram& tree) {
  for (std::size_t i = 0; i < tree.labels.size(); ++i) {
    Dendrogram::Node leaf;
    leaf.leaf = static_cast<int>(i);
    tree.nodes.push_back(std::move(leaf));
  }
}

inline SymMatrix internal_distances(const ProximityData& data, bool negate) {
  const std::size_t n = data.size();
  SymMatrix dist(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = data.values(i, j);
      dist.set(i, j, round_to(negate ? -v : v, data.precision));
    }
  return dist;
}

inline std::vector<std::pair<std::size_t, std::size_t>> minimum_pairs(const SymMatrix& dist,
                                                                      double& d_min) {
  const std::size_t m = dist.size();
  d_min = dist(0, 1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) d_min = std::min(d_min, dist(i, j));
  std::vector<std::pair<std::size_t, std::size_t>> tied;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (dist(i, j) == d_min) tied.emplace_back(i, j);
  return tied;
}

// Merges clusters a and b (table indices) at height d, appending the new tree
// node and replacing the pair by one cluster whose distances follow the
// pairwise recurrence, rounded back to the working precision.
inline void merge_pair(std::vector<PgCluster>& clusters, SymMatrix& dist, Dendrogram& tree,
                       Method method, int precision, std::size_t a, std::size_t b, double d) {
  assert(a < b);
  const std::size_t m = clusters.size();

  Dendrogram::Node node;
  node.leaf = -1;
  node.height = d;
  node.leaf_count = static_cast<int>(clusters[a].leaves.size() + clusters[b].leaves.size());
  node.children = {clusters[a].node, clusters[b].node};
  if (tree.min_leaf(node.children[0]) > tree.min_leaf(node.children[1]))
    std::swap(node.children[0], node.children[1]);
  const int node_idx = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(std::move(node));

  PgCluster merged;
  merged.leaves = clusters[a].leaves;
  merged.leaves.insert(merged.leaves.end(), clusters[b].leaves.begin(), clusters[b].leaves.end());
  std::sort(merged.leaves.begin(), merged.leaves.end());
  merged.node = node_idx;
  merged.id = std::min(clusters[a].id, clusters[b].id);

  std::vector<PgCluster> next;
  next.reserve(m - 1);
  std::vector<std::size_t> old_of;  // next-table index -> old index, merged last
  for (std::size_t k = 0; k < m; ++k)
    if (k != a && k != b) {
      next.push_back(std::move(clusters[k]));
      old_of.push_back(k);
    }
  next.push_back(std::move(merged));

  SymMatrix nd(m - 1);
  for (std::size_t x = 0; x + 1 < m - 1; ++x)
    for (std::size_t y = x + 1; y + 1 < m - 1; ++y) nd.set(x, y, dist(old_of[x], old_of[y]));
  const std::size_t size_a = clusters[a].leaves.size();
  const std::size_t size_b = clusters[b].leaves.size();
  for (std::size_t x = 0; x + 1 < m - 1; ++x) {
    const std::size_t k = old_of[x];
    const double updated = pair_update(method, size_a, size_b, next[x].leaves.size(),
                                       dist(a, k), dist(b, k), d);
    nd.set(x, m - 2, round_to(updated, precision));
  }

  clusters = std::move(next);
  dist = std::move(nd);
}

inline void finish_tree(Dendrogram& tree, int root, bool negate) {
  tree.root = root;
  if (negate)
    for (auto& node : tree.nodes)
      if (node.leaf < 0) node.height = -node.height;
}

inline std::string serialize_subtree(const Dendrogram& tree, int idx) {
  const auto& node = tree.nodes[idx];
  if (node.children.empty()) return "L" + std::to_string(node.leaf);
  std::vector<std::pair<int, std::string>> parts;
  for (int child : node.children)
    parts.emplace_back(tree.min_leaf(child), serialize_subtree(tree, child));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i].second;
  }
  out += ")#" + format_shortest(node.height);
  return out;
}

}  // namespace detail

// Classical agglomerative clustering: repeatedly merge the two closest
// clusters, resolving ties with the given policy. Weight data is clustered
// on negated values and mapped back, so the largest weight merges first.
inline Dendrogram pair_group_cluster(const ProximityData& data, Method method,
                                     TiePolicy policy = TiePolicy::first(),
                                     PairGroupStats* stats = nullptr) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("need at least two nodes to cluster");
  const bool negate = data.measure == Measure::Weight;

  Dendrogram tree;
  tree.labels = data.labels;
  tree.precision = data.precision;
  tree.measure = data.measure;
  tree.nodes.reserve(2 * n);
  detail::append_leaves(tree);

  std::vector<detail::PgCluster> clusters(n);
  for (std::size_t i = 0; i < n; ++i)
    clusters[i] = {{static_cast<int>(i)}, static_cast<int>(i), static_cast<int>(i)};
  SymMatrix dist = detail::internal_distances(data, negate);

  std::mt19937_64 rng(policy.seed);
  PairGroupStats local;
  while (clusters.size() > 1) {
    double d_min;
    auto tied = detail::minimum_pairs(dist, d_min);
    if (tied.size() > 1) ++local.tie_iterations;

    std::size_t pick = 0;
    if (tied.size() > 1) {
      auto key = [&](const std::pair<std::size_t, std::size_t>& pr) {
        return std::pair<int, int>(std::min(clusters[pr.first].id, clusters[pr.second].id),
                                   std::max(clusters[pr.first].id, clusters[pr.second].id));
      };
      switch (policy.kind) {
        case TiePolicy::Kind::first_index:
          for (std::size_t t = 1; t < tied.size(); ++t)
            if (key(tied[t]) < key(tied[pick])) pick = t;
          break;
        case TiePolicy::Kind::last_index:
          for (std::size_t t = 1; t < tied.size(); ++t)
            if (key(tied[t]) > key(tied[pick])) pick = t;
          break;
        case TiePolicy::Kind::random:
          pick = static_cast<std::size_t>(rng() % tied.size());
          break;
      }
    }
    detail::merge_pair(clusters, dist, tree, method, data.precision, tied[pick].first,
                       tied[pick].second, d_min);
  }

  for (const auto& node : tree.nodes)
    for (int child : node.children)
      if (!tree.is_leaf(child) && tree.nodes[child].height > node.height)
        ++local.height_reversals;

  detail::finish_tree(tree, clusters[0].node, negate);
  if (stats) *stats = local;
  return tree;
}

// Explores every tie-break order and returns the structurally distinct
// dendrograms (same shape and same fusion heights collapse together), sorted
// by their canonical serialization. Throws once the number of explored merge
// sequences exceeds `max_count`.
inline std::vector<Dendrogram> enumerate_tie_dendrograms(const ProximityData& data, Method method,
                                                         std::size_t max_count = 10000) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("need at least two nodes to cluster");
  const bool negate = data.measure == Measure::Weight;

  Dendrogram base;
  base.labels = data.labels;
  base.precision = data.precision;
  base.measure = data.measure;
  detail::append_leaves(base);

  std::vector<detail::PgCluster> clusters(n);
  for (std::size_t i = 0; i < n; ++i)
    clusters[i] = {{static_cast<int>(i)}, static_cast<int>(i), static_cast<int>(i)};

  std::map<std::string, Dendrogram> distinct;
  std::size_t paths = 0;

  auto recurse = [&](auto&& self, std::vector<detail::PgCluster> cl, SymMatrix dist,
                     Dendrogram tree) -> void {
    if (cl.size() == 1) {
      if (++paths > max_count)
        throw EnumerationBudgetExceeded("tie enumeration exceeded " + std::to_string(max_count) +
                                        " merge sequences");
      detail::finish_tree(tree, cl[0].node, negate);
      distinct.try_emplace(detail::serialize_subtree(tree, tree.root), std::move(tree));
      return;
    }
    double d_min;
    auto tied = detail::minimum_pairs(dist, d_min);
    for (const auto& pr : tied) {
      auto cl2 = cl;
      auto dist2 = dist;
      auto tree2 = tree;
      detail::merge_pair(cl2, dist2, tree2, method, data.precision, pr.first, pr.second, d_min);
      self(self, std::move(cl2), std::move(dist2), std::move(tree2));
    }
  };
  recurse(recurse, std::move(clusters), detail::internal_distances(data, negate), std::move(base));

  std::vector<Dendrogram> out;
  out.reserve(distinct.size());
  for (auto& [key, tree] : distinct) out.push_back(std::move(tree));
  return out;
}

}  // namespace mdendro
