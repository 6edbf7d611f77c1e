#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"
#include "pair_group.hpp"
#include "proximity.hpp"
#include "variable_group.hpp"

namespace mdendro {

// Cophenetic distances induced by a tree: entry (i, j) is the fusion value
// of the lowest node containing both leaves.
struct UltrametricMatrix {
  std::vector<std::string> labels;
  SymMatrix values;
  int precision = 0;
};

namespace detail {

template <class Tree>
UltrametricMatrix cophenetic_matrix_impl(const Tree& tree) {
  UltrametricMatrix u;
  u.labels = tree.labels;
  u.precision = tree.precision;
  u.values = SymMatrix(tree.labels.size());

  std::vector<std::vector<int>> leaf_sets(tree.nodes.size());
  auto walk = [&](auto&& self, int idx) -> void {
    const auto& node = tree.nodes[idx];
    if (node.children.empty()) {
      leaf_sets[idx] = {node.leaf};
      return;
    }
    for (int child : node.children) self(self, child);
    const double f = tree.fusion(idx);
    auto& own = leaf_sets[idx];
    for (int child : node.children) {
      for (int a : own)
        for (int b : leaf_sets[child]) u.values.set(a, b, f);
      own.insert(own.end(), leaf_sets[child].begin(), leaf_sets[child].end());
      leaf_sets[child].clear();
      leaf_sets[child].shrink_to_fit();
    }
  };
  walk(walk, tree.root);
  return u;
}

}  // namespace detail

inline UltrametricMatrix cophenetic_matrix(const Multidendrogram& tree) {
  return detail::cophenetic_matrix_impl(tree);
}

inline UltrametricMatrix cophenetic_matrix(const Dendrogram& tree) {
  return detail::cophenetic_matrix_impl(tree);
}

// How well the tree distances reproduce the original ones, over the strict
// upper triangle. ccc is the Pearson correlation between the two value sets
// (NaN when either side is constant); nmse and nmae normalize by the squared
// and absolute original values.
struct DeviationReport {
  double ccc = 0.0;
  double nmse = 0.0;
  double nmae = 0.0;
};

inline DeviationReport deviation_measures(const ProximityData& original,
                                          const UltrametricMatrix& ultra) {
  if (original.labels != ultra.labels)
    throw std::invalid_argument("deviation_measures: label sets differ");
  const std::size_t n = original.size();
  const std::size_t pairs = n * (n - 1) / 2;
  if (pairs == 0) throw std::invalid_argument("deviation_measures: no pairs");

  double sum_d = 0.0, sum_u = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      sum_d += original.values(i, j);
      sum_u += ultra.values(i, j);
    }
  const double mean_d = sum_d / double(pairs);
  const double mean_u = sum_u / double(pairs);

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  double sq_diff = 0.0, sq_d = 0.0, abs_diff = 0.0, abs_d = 0.0;
  // Constancy is checked exactly; a sample variance of equal values can come
  // out as a tiny nonzero number because the mean itself is rounded.
  bool constant_d = true, constant_u = true;
  const double first_d = original.values(0, 1);
  const double first_u = ultra.values(0, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = original.values(i, j);
      const double t = ultra.values(i, j);
      constant_d = constant_d && d == first_d;
      constant_u = constant_u && t == first_u;
      sxx += (d - mean_d) * (d - mean_d);
      syy += (t - mean_u) * (t - mean_u);
      sxy += (d - mean_d) * (t - mean_u);
      sq_diff += (d - t) * (d - t);
      sq_d += d * d;
      abs_diff += std::fabs(d - t);
      abs_d += std::fabs(d);
    }

  DeviationReport report;
  report.ccc = (constant_d || constant_u) ? std::numeric_limits<double>::quiet_NaN()
                                          : sxy / std::sqrt(sxx * syy);
  report.nmse = sq_d == 0.0 ? std::numeric_limits<double>::quiet_NaN() : sq_diff / sq_d;
  report.nmae = abs_d == 0.0 ? std::numeric_limits<double>::quiet_NaN() : abs_diff / abs_d;
  return report;
}

// Plain recursive view of a tree, ready for printing.
struct NodeDetails {
  bool is_leaf = false;
  std::string label;
  int leaf_count = 1;
  double band_lower = 0.0;
  double band_upper = 0.0;
  std::vector<NodeDetails> children;
};

inline NodeDetails details(const Multidendrogram& tree) {
  auto build = [&](auto&& self, int idx) -> NodeDetails {
    const auto& node = tree.nodes[idx];
    NodeDetails out;
    if (node.children.empty()) {
      out.is_leaf = true;
      out.label = tree.labels[node.leaf];
      return out;
    }
    out.leaf_count = node.leaf_count;
    out.band_lower = node.band_lower;
    out.band_upper = node.band_upper;
    for (int child : node.children) out.children.push_back(self(self, child));
    return out;
  };
  return build(build, tree.root);
}

// A binary tree is a multidendrogram whose bands collapse to single points.
inline Multidendrogram to_multidendrogram(const Dendrogram& tree) {
  Multidendrogram out;
  out.labels = tree.labels;
  out.precision = tree.precision;
  out.measure = tree.measure;
  out.root = tree.root;
  out.nodes.reserve(tree.nodes.size());
  for (const auto& node : tree.nodes) {
    Multidendrogram::Node copy;
    copy.leaf = node.leaf;
    copy.leaf_count = node.leaf_count;
    copy.children = node.children;
    if (node.leaf < 0) {
      copy.band_lower = node.height;
      copy.band_upper = node.height;
    }
    out.nodes.push_back(std::move(copy));
  }
  return out;
}

// Canonical serialization: children ordered by smallest leaf index, bands in
// shortest round-trip form. Two trees are structurally identical over the
// same leaf numbering exactly when their canonical forms match.
inline std::string canonical_form(const Multidendrogram& tree) {
  auto walk = [&](auto&& self, int idx) -> std::pair<int, std::string> {
    const auto& node = tree.nodes[idx];
    if (node.children.empty()) return {node.leaf, "L" + std::to_string(node.leaf)};
    std::vector<std::pair<int, std::string>> parts;
    for (int child : node.children) parts.push_back(self(self, child));
    std::sort(parts.begin(), parts.end());
    std::string repr = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) repr += ",";
      repr += parts[i].second;
    }
    repr += ")#" + format_shortest(node.band_lower) + "#" + format_shortest(node.band_upper);
    return {parts.front().first, std::move(repr)};
  };
  return walk(walk, tree.root).second;
}

// Renumbers leaves (old index -> new_of_old[i]) and installs the labels that
// go with the new numbering. Stored child order is refreshed to stay
// canonical under the new indices.
inline Multidendrogram relabel_leaves(Multidendrogram tree, const std::vector<int>& new_of_old,
                                      std::vector<std::string> new_labels) {
  for (auto& node : tree.nodes)
    if (node.leaf >= 0) node.leaf = new_of_old[node.leaf];
  tree.labels = std::move(new_labels);
  // Children are created before their parents, so an index-order pass sees
  // every subtree already re-sorted when its parent is reached.
  for (auto& node : tree.nodes)
    std::sort(node.children.begin(), node.children.end(),
              [&](int a, int b) { return tree.min_leaf(a) < tree.min_leaf(b); });
  return tree;
}

}  // namespace mdendro
