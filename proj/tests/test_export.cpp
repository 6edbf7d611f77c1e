#include <doctest.h>

#include <mdendro/export.hpp>

#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"

using namespace mdendro;

namespace {

Multidendrogram triangle_tree() {
  const auto data = testutil::make_data({"A", "B", "C"}, {0.4, 0.5, 0.4}, 1);
  return variable_group_cluster(data, Method::complete_linkage).tree;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

std::vector<std::string> svg_lines(const std::string& svg) {
  std::vector<std::string> out;
  for (std::size_t pos = svg.find("<line "); pos != std::string::npos;
       pos = svg.find("<line ", pos + 1))
    out.push_back(svg.substr(pos, svg.find("/>", pos) + 2 - pos));
  return out;
}

// Walks the export and a freshly parsed copy side by side, checking that the
// parsed branch lengths reproduce every fusion height within half a unit of
// the last printed decimal.
void check_newick_roundtrip(const Multidendrogram& tree, int precision) {
  const std::string text = to_newick(tree, precision);
  const auto parsed = testutil::parse_newick(text);
  const double tolerance = 0.5 * std::pow(10.0, -precision) + 1e-12;
  auto compare = [&](auto&& self, int idx, const testutil::NewickNode& node) -> void {
    const auto& mine = tree.nodes[idx];
    REQUIRE(node.children.size() == mine.children.size());
    if (mine.children.empty()) return;
    CHECK(std::fabs(testutil::newick_node_height(node) - tree.fusion(idx)) <= tolerance);
    for (std::size_t k = 0; k < mine.children.size(); ++k)
      self(self, mine.children[k], node.children[k]);
  };
  compare(compare, tree.root, parsed);
}

}  // namespace

TEST_SUITE("export") {
  TEST_CASE("text details of a pair") {
    const auto data = testutil::make_data({"a", "b"}, {5.0}, 1);
    const auto tree = variable_group_cluster(data, Method::single_linkage).tree;
    CHECK(to_text_details(tree) == "2  [5.0, 5.0]\n  a\n  b\n");
  }

  TEST_CASE("text details of a banded node") {
    CHECK(to_text_details(triangle_tree()) == "3  [0.4, 0.5]\n  A\n  B\n  C\n");
  }

  TEST_CASE("text details indent nested children") {
    const auto data = testutil::make_data({"A", "B", "C"}, {1.0, 3.0, 2.0}, 1);
    const auto tree = variable_group_cluster(data, Method::single_linkage).tree;
    CHECK(to_text_details(tree) == "3  [2.0, 2.0]\n  2  [1.0, 1.0]\n    A\n    B\n  C\n");
  }

  TEST_CASE("newick uses scalar fusion values only") {
    CHECK(to_newick(triangle_tree(), 1) == "(A:0.4,B:0.4,C:0.4);\n");
    const auto pair = testutil::make_data({"a", "b"}, {5.0}, 1);
    CHECK(to_newick(variable_group_cluster(pair, Method::single_linkage).tree, 1) ==
          "(a:5.0,b:5.0);\n");
    const auto chain = testutil::make_data({"A", "B", "C"}, {1.0, 3.0, 2.0}, 1);
    CHECK(to_newick(variable_group_cluster(chain, Method::single_linkage).tree, 1) ==
          "((A:1.0,B:1.0):1.0,C:2.0);\n");
  }

  TEST_CASE("newick sanitizes labels and keeps them unique") {
    const auto data = testutil::make_data({"a b", "a:b", "c(d)"}, {1.0, 3.0, 2.0}, 1);
    const auto tree = variable_group_cluster(data, Method::single_linkage).tree;
    const std::string text = to_newick(tree, 1);
    CHECK(text == "((a_b:1.0,a_b_2:1.0):1.0,c_d_:2.0);\n");
  }

  TEST_CASE("newick re-parses to the same heights") {
    std::mt19937_64 rng(601);
    for (int t = 0; t < 20; ++t) {
      auto data = testutil::random_distance_data(rng, 3 + t % 8, 2, false);
      if (t % 2) testutil::plant_tie(rng, data);
      const auto tree =
          variable_group_cluster(data, all_methods[t % all_methods.size()]).tree;
      check_newick_roundtrip(tree, data.precision);
    }
  }

  TEST_CASE("ultrametric table export and round-trip") {
    const auto pair = testutil::make_data({"a", "b"}, {3.0}, 0);
    const auto tree = variable_group_cluster(pair, Method::single_linkage).tree;
    const auto u = cophenetic_matrix(tree);
    CHECK(ultrametric_to_txt(u) == "a\tb\n0\t3\n3\t0\n");

    const auto parsed = parse_matrix(ultrametric_to_txt(u));
    CHECK(parsed.labels == u.labels);
    CHECK(parsed.values == u.values);
  }

  TEST_CASE("ultrametric round-trip preserves banded fusion values") {
    const auto u = cophenetic_matrix(triangle_tree());
    const std::string text = ultrametric_to_txt(u);
    CHECK(text == "A\tB\tC\n0.0\t0.4\t0.4\n0.4\t0.0\t0.4\n0.4\t0.4\t0.0\n");
    const auto parsed = parse_matrix(text);
    CHECK(parsed.values == u.values);
  }

  TEST_CASE("svg draws one band rectangle for the triangle") {
    const std::string svg = render_svg(triangle_tree());
    CHECK(count_occurrences(svg, "<rect ") == 1);
    CHECK(svg.find("<rect x=\"90.00\" y=\"20.00\" width=\"80.00\" height=\"80.00\" "
                   "fill=\"lightgray\"/>") != std::string::npos);
  }

  TEST_CASE("svg without bands places the junction at the band base") {
    RenderOptions options;
    options.show_bands = false;
    const std::string svg = render_svg(triangle_tree(), options);
    CHECK(count_occurrences(svg, "<rect ") == 0);
    // Cross bar at the fusion value 0.4, which maps to y = 100.
    CHECK(svg.find("<line x1=\"90.00\" y1=\"100.00\" x2=\"170.00\" y2=\"100.00\"") !=
          std::string::npos);
  }

  TEST_CASE("svg binary junctions sit at the merge height") {
    const auto data = testutil::make_data({"a", "b"}, {5.0}, 1);
    const auto tree = variable_group_cluster(data, Method::single_linkage).tree;
    const std::string svg = render_svg(tree);
    CHECK(count_occurrences(svg, "<rect ") == 0);
    CHECK(svg.find("<line x1=\"90.00\" y1=\"20.00\" x2=\"130.00\" y2=\"20.00\"") !=
          std::string::npos);
  }

  TEST_CASE("north and south renderings mirror the tree geometry") {
    RenderOptions north;
    RenderOptions south;
    south.orientation = RenderOptions::Orientation::south;
    const auto tree = triangle_tree();
    const auto lines_north = svg_lines(render_svg(tree, north));
    const auto lines_south = svg_lines(render_svg(tree, south));
    REQUIRE(lines_north.size() == lines_south.size());
    // The canvas is 470 tall; mirrored lines must appear in the south set.
    auto mirrored = [&](const std::string& line) {
      std::string flipped = line;
      for (const char* attr : {"y1=\"", "y2=\""}) {
        const std::size_t pos = flipped.find(attr);
        const std::size_t start = pos + 4;
        const std::size_t end = flipped.find('"', start);
        const double y = std::stod(flipped.substr(start, end - start));
        flipped = flipped.substr(0, start) + format_fixed(470.0 - y, 2) + flipped.substr(end);
      }
      return flipped;
    };
    for (const auto& line : lines_north) {
      const std::string expected = mirrored(line);
      bool found = false;
      for (const auto& candidate : lines_south)
        if (candidate == expected) found = true;
      CHECK(found);
    }
  }

  TEST_CASE("east and west renderings swap the canvas") {
    const auto tree = triangle_tree();
    RenderOptions east;
    east.orientation = RenderOptions::Orientation::east;
    const std::string svg = render_svg(tree, east);
    CHECK(svg.find("width=\"470.00\" height=\"210.00\"") != std::string::npos);
    RenderOptions north;
    CHECK(render_svg(tree, north).find("width=\"210.00\" height=\"470.00\"") !=
          std::string::npos);
  }

  TEST_CASE("svg output is deterministic") {
    const auto tree = triangle_tree();
    CHECK(render_svg(tree) == render_svg(tree));
  }

  TEST_CASE("axis options are validated") {
    const auto tree = triangle_tree();
    RenderOptions bad_range;
    bad_range.axis_min = 1.0;
    bad_range.axis_max = 0.5;
    CHECK_THROWS_AS(render_svg(tree, bad_range), InvalidAxisRange);
    RenderOptions bad_tick;
    bad_tick.tick_separation = -0.1;
    CHECK_THROWS_AS(render_svg(tree, bad_tick), InvalidAxisRange);
    RenderOptions tiny_tick;
    tiny_tick.tick_separation = 1e-9;
    CHECK_THROWS_AS(render_svg(tree, tiny_tick), InvalidAxisRange);
  }

  TEST_CASE("tick steps snap to 1, 2 or 5 times a power of ten") {
    CHECK(detail::nice_tick_step(0.037) == 0.05);
    CHECK(detail::nice_tick_step(0.012) == 0.01);
    CHECK(detail::nice_tick_step(0.3) == 0.2);
    CHECK(detail::nice_tick_step(7.0) == 5.0);
  }

  TEST_CASE("labels are escaped and can be hidden") {
    const auto data = testutil::make_data({"a<b", "c&d"}, {1.0}, 1);
    const auto tree = variable_group_cluster(data, Method::single_linkage).tree;
    const std::string svg = render_svg(tree);
    CHECK(svg.find("a&lt;b") != std::string::npos);
    CHECK(svg.find("c&amp;d") != std::string::npos);
    RenderOptions quiet;
    quiet.show_labels = false;
    quiet.show_axis = false;
    const std::string bare = render_svg(tree, quiet);
    CHECK(bare.find("<text") == std::string::npos);
  }
}
