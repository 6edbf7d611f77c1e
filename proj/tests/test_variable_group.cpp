#include <doctest.h>

#include <mdendro/dendro.hpp>
#include <mdendro/variable_group.hpp>

#include <random>

#include "test_util.hpp"

using namespace mdendro;

namespace {

ProximityData tie_triangle() {
  return testutil::make_data({"A", "B", "C"}, {0.4, 0.5, 0.4}, 1);
}

// Three mutually close points whose group sits far from its centroid-style
// distance to the fourth, forcing the next minimum below the band top.
ProximityData centroid_reversal_data() {
  return testutil::make_data({"A", "B", "C", "D"}, {0.4, 0.8, 0.5, 0.4, 0.5, 0.5}, 1);
}

AgglomerationState state_from(const ProximityData& data) {
  AgglomerationState state;
  const std::size_t n = data.size();
  state.clusters.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    state.clusters[i] = {{static_cast<int>(i)}, static_cast<int>(i)};
  state.dist = data.values;
  double d = data.values(0, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d = std::min(d, data.values(i, j));
  state.d_lower = d;
  return state;
}

}  // namespace

TEST_SUITE("variable_group") {
  TEST_CASE("tie_groups splits clusters into tie components") {
    SUBCASE("a chained tie joins all three") {
      const auto state = state_from(tie_triangle());
      const auto components = tie_groups(state);
      REQUIRE(components.size() == 1);
      CHECK(components[0] == std::vector<std::size_t>{0, 1, 2});
    }
    SUBCASE("a unique minimum pairs two and leaves the rest alone") {
      const auto state =
          state_from(testutil::make_data({"A", "B", "C"}, {0.3, 0.6, 0.5}, 1));
      const auto components = tie_groups(state);
      REQUIRE(components.size() == 2);
      CHECK(components[0] == std::vector<std::size_t>{0, 1});
      CHECK(components[1] == std::vector<std::size_t>{2});
    }
    SUBCASE("disjoint ties form separate superclusters") {
      const auto state = state_from(
          testutil::make_data({"A", "B", "C", "D"}, {0.2, 0.5, 0.6, 0.7, 0.8, 0.2}, 1));
      const auto components = tie_groups(state);
      REQUIRE(components.size() == 2);
      CHECK(components[0] == std::vector<std::size_t>{0, 1});
      CHECK(components[1] == std::vector<std::size_t>{2, 3});
    }
  }

  TEST_CASE("agglomeration_interval spans the component distances") {
    const auto state = state_from(tie_triangle());
    const auto [lo, hi] = agglomeration_interval({0, 1, 2}, state);
    CHECK(lo == 0.4);
    CHECK(hi == 0.5);
    CHECK_THROWS_AS(agglomeration_interval({0, 2}, state), std::logic_error);
  }

  TEST_CASE("chained ties merge into one banded node") {
    const auto result = variable_group_cluster(tie_triangle(), Method::complete_linkage);
    const auto& tree = result.tree;
    const auto& root = tree.nodes[tree.root];
    CHECK(root.children.size() == 3);
    CHECK(root.band_lower == 0.4);
    CHECK(root.band_upper == 0.5);
    CHECK(root.leaf_count == 3);
    CHECK(tree.fusion(tree.root) == 0.4);
    CHECK(result.band_nodes == 1);
    CHECK(result.tie_iterations == 1);
    CHECK(result.reversals.empty());
    REQUIRE(result.trace.iterations.size() == 1);
    CHECK(result.trace.iterations[0].d_lower == 0.4);
    CHECK(result.trace.iterations[0].tied_pairs == 2);
    CHECK(!result.trace.iterations[0].d_next.has_value());
    CHECK(canonical_form(tree) == "(L0,L1,L2)#0.4#0.5");
  }

  TEST_CASE("without ties the variable-group tree equals the pair-group tree") {
    std::mt19937_64 rng(401);
    int compared = 0;
    while (compared < 25) {
      const auto data = testutil::random_distance_data(rng, 3 + compared % 8, 6, true);
      bool tie_free = true;
      std::vector<std::string> canon_var;
      for (Method m : all_methods) {
        const auto result = variable_group_cluster(data, m);
        if (result.tie_iterations > 0) {
          tie_free = false;
          break;
        }
        canon_var.push_back(canonical_form(result.tree));
      }
      if (!tie_free) continue;
      ++compared;
      for (std::size_t k = 0; k < all_methods.size(); ++k) {
        const auto tree = pair_group_cluster(data, all_methods[k]);
        CHECK(canonical_form(to_multidendrogram(tree)) == canon_var[k]);
      }
    }
  }

  TEST_CASE("single linkage cophenetic distances ignore tie order") {
    std::mt19937_64 rng(402);
    for (int t = 0; t < 10; ++t) {
      auto data = testutil::random_distance_data(rng, 4 + t % 4, 2, true);
      testutil::plant_tie(rng, data);
      if (t % 2) testutil::plant_tie(rng, data);
      const auto result = variable_group_cluster(data, Method::single_linkage);
      const auto expected = cophenetic_matrix(result.tree);
      const auto trees = enumerate_tie_dendrograms(data, Method::single_linkage, 100000);
      for (const auto& tree : trees)
        CHECK(cophenetic_matrix(tree).values == expected.values);
    }
  }

  TEST_CASE("the result is invariant under input permutations") {
    std::mt19937_64 rng(403);
    for (int t = 0; t < 20; ++t) {
      auto data = testutil::random_distance_data(rng, 3 + t % 8, 2, false);
      if (t % 2) testutil::plant_tie(rng, data);
      const Method m = all_methods[t % all_methods.size()];
      const auto reference = variable_group_cluster(data, m);
      const auto perm = testutil::random_permutation(rng, data.size());
      const auto permuted = variable_group_cluster(testutil::permute(data, perm), m);
      const auto mapped = testutil::unpermute_tree(permuted.tree, perm, data.labels);
      CHECK(canonical_form(mapped) == canonical_form(reference.tree));
    }
  }

  TEST_CASE("bands are ordered and fusion levels never decrease for min and max linkage") {
    std::mt19937_64 rng(404);
    for (int t = 0; t < 50; ++t) {
      auto data = testutil::random_distance_data(rng, 3 + t % 8, 1, false);
      if (t % 3 == 0) testutil::plant_tie(rng, data);
      for (Method m : {Method::single_linkage, Method::complete_linkage}) {
        const auto result = variable_group_cluster(data, m);
        for (const auto& node : result.tree.nodes)
          if (node.leaf < 0) CHECK(node.band_lower <= node.band_upper);
        double previous = -1.0;
        for (const auto& record : result.trace.iterations) {
          CHECK(record.d_lower >= previous);
          previous = record.d_lower;
        }
      }
    }
  }

  TEST_CASE("min and max linkage report no band reversals on random data") {
    std::mt19937_64 rng(405);
    for (int t = 0; t < 100; ++t) {
      const auto data = testutil::random_distance_data(rng, 3 + t % 8, 6, true);
      CHECK(variable_group_cluster(data, Method::single_linkage).reversals.empty());
      CHECK(variable_group_cluster(data, Method::complete_linkage).reversals.empty());
    }
  }

  TEST_CASE("a centroid band can overshoot the next fusion level") {
    const auto result =
        variable_group_cluster(centroid_reversal_data(), Method::unweighted_centroid);
    REQUIRE(result.reversals.size() == 1);
    CHECK(result.reversals[0].band_upper == 0.8);
    CHECK(result.reversals[0].d_next == 0.3);
    CHECK(canonical_form(result.tree) == "((L0,L1,L2)#0.4#0.8,L3)#0.3#0.3");
    REQUIRE(result.trace.iterations.size() == 2);
    CHECK(result.trace.iterations[0].d_next == 0.3);
  }

  TEST_CASE("weights cluster from the top and map their bands back") {
    const auto data =
        testutil::make_data({"a", "b", "c"}, {0.9, 0.7, 0.9}, 1, Measure::Weight);
    const auto result = variable_group_cluster(data, Method::single_linkage);
    const auto& root = result.tree.nodes[result.tree.root];
    CHECK(root.children.size() == 3);
    CHECK(root.band_lower == 0.7);
    CHECK(root.band_upper == 0.9);
    // Weight trees fuse at the band top.
    CHECK(result.tree.fusion(result.tree.root) == 0.9);
  }

  TEST_CASE("two nodes form a degenerate band") {
    const auto data = testutil::make_data({"a", "b"}, {5.0}, 1);
    const auto result = variable_group_cluster(data, Method::ward);
    const auto& root = result.tree.nodes[result.tree.root];
    CHECK(root.band_lower == 5.0);
    CHECK(root.band_upper == 5.0);
  }
}
