#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dendro.hpp"
#include "numeric.hpp"
#include "variable_group.hpp"

namespace mdendro {

class InvalidAxisRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Replaces every field separator and Newick metacharacter with '_', then
// suffixes clashing results with a counter so the output names stay unique.
inline std::vector<std::string> sanitized_labels(const std::vector<std::string>& labels) {
  auto clean = [](std::string s) {
    for (char& c : s)
      if (c == ' ' || c == '\t' || c == ';' || c == ',' || c == '|' || c == '(' || c == ')' ||
          c == ':')
        c = '_';
    return s;
  };
  std::vector<std::string> out;
  out.reserve(labels.size());
  std::map<std::string, int> used;
  for (const auto& label : labels) {
    std::string name = clean(label);
    if (used.count(name)) {
      int suffix = 2;
      while (used.count(name + "_" + std::to_string(suffix))) ++suffix;
      name += "_" + std::to_string(suffix);
    }
    used.emplace(name, 1);
    out.push_back(std::move(name));
  }
  return out;
}

// Indented outline of a tree: internal nodes print their leaf count and
// band, leaves print their label.
inline std::string to_text_details(const NodeDetails& root, int precision) {
  std::string out;
  auto walk = [&](auto&& self, const NodeDetails& node, int depth) -> void {
    out.append(static_cast<std::size_t>(2 * depth), ' ');
    if (node.is_leaf) {
      out += node.label;
      out += "\n";
      return;
    }
    out += std::to_string(node.leaf_count);
    out += "  [" + format_fixed(node.band_lower, precision) + ", " +
           format_fixed(node.band_upper, precision) + "]\n";
    for (const auto& child : node.children) self(self, child, depth + 1);
  };
  walk(walk, root, 0);
  return out;
}

inline std::string to_text_details(const Multidendrogram& tree) {
  return to_text_details(details(tree), tree.precision);
}

// Newick form with branch lengths. Every node hangs at its fusion value,
// leaves at zero, so a branch is the parent fusion minus the child fusion.
inline std::string to_newick(const Multidendrogram& tree, int precision) {
  const auto names = sanitized_labels(tree.labels);
  std::string out;
  auto walk = [&](auto&& self, int idx, double parent_fusion) -> void {
    const auto& node = tree.nodes[idx];
    if (node.children.empty()) {
      out += names[node.leaf];
      out += ":" + format_fixed(parent_fusion, precision);
      return;
    }
    out += "(";
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i) out += ",";
      self(self, node.children[i], tree.fusion(idx));
    }
    out += ")";
    out += ":" + format_fixed(parent_fusion - tree.fusion(idx), precision);
  };
  const auto& root = tree.nodes[tree.root];
  out += "(";
  for (std::size_t i = 0; i < root.children.size(); ++i) {
    if (i) out += ",";
    walk(walk, root.children[i], tree.fusion(tree.root));
  }
  out += ");\n";
  return out;
}

// Tab-separated table: one label row, then the full square matrix at the
// stored precision.
inline std::string ultrametric_to_txt(const UltrametricMatrix& ultra) {
  const auto names = sanitized_labels(ultra.labels);
  const std::size_t n = names.size();
  std::string out;
  for (std::size_t j = 0; j < n; ++j) {
    if (j) out += "\t";
    out += names[j];
  }
  out += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out += "\t";
      out += format_fixed(ultra.values(i, j), ultra.precision);
    }
    out += "\n";
  }
  return out;
}

struct RenderOptions {
  enum class Orientation { north, south, east, west };

  Orientation orientation = Orientation::north;
  bool show_bands = true;
  std::string band_color = "lightgray";
  bool show_axis = true;
  bool show_labels = true;
  std::optional<double> axis_min;        // default: min(0, smallest band lower)
  std::optional<double> axis_max;        // default: largest band upper
  std::optional<double> tick_separation; // default: range / 10 snapped to 1/2/5
  std::optional<int> label_decimals;     // default: tree precision
};

namespace detail {

constexpr double kLeafSlot = 40.0;
constexpr double kPlotSpan = 400.0;
constexpr double kMarginAxis = 70.0;
constexpr double kMarginFar = 20.0;
constexpr double kMarginRoot = 20.0;
constexpr double kMarginLeaves = 50.0;

// Snaps a raw step to the nearest 1, 2 or 5 times a power of ten.
inline double nice_tick_step(double raw) {
  if (!(raw > 0.0)) return 1.0;
  const double base = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / base;
  double best = 1.0;
  double best_gap = std::fabs(f - 1.0);
  for (double candidate : {2.0, 5.0, 10.0}) {
    const double gap = std::fabs(f - candidate);
    if (gap < best_gap) {
      best = candidate;
      best_gap = gap;
    }
  }
  return best * base;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Maps reference coordinates (root up, axis left) onto the requested
// orientation. `H` is the reference canvas height.
struct Frame {
  RenderOptions::Orientation orientation;
  double W;
  double H;

  Point point(double x, double y) const {
    switch (orientation) {
      case RenderOptions::Orientation::north: return {x, y};
      case RenderOptions::Orientation::south: return {x, H - y};
      case RenderOptions::Orientation::east: return {H - y, x};
      case RenderOptions::Orientation::west: return {y, x};
    }
    return {x, y};
  }

  Point direction(double dx, double dy) const {
    switch (orientation) {
      case RenderOptions::Orientation::north: return {dx, dy};
      case RenderOptions::Orientation::south: return {dx, -dy};
      case RenderOptions::Orientation::east: return {-dy, dx};
      case RenderOptions::Orientation::west: return {dy, dx};
    }
    return {dx, dy};
  }

  double canvas_width() const {
    return orientation == RenderOptions::Orientation::north ||
                   orientation == RenderOptions::Orientation::south
               ? W
               : H;
  }
  double canvas_height() const {
    return orientation == RenderOptions::Orientation::north ||
                   orientation == RenderOptions::Orientation::south
               ? H
               : W;
  }
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out.push_back(c);
  }
  return out;
}

inline std::string svg_num(double v) { return format_fixed(v, 2); }

inline void emit_line(std::string& out, const Frame& frame, double x1, double y1, double x2,
                      double y2) {
  const Point a = frame.point(x1, y1);
  const Point b = frame.point(x2, y2);
  out += "<line x1=\"" + svg_num(a.x) + "\" y1=\"" + svg_num(a.y) + "\" x2=\"" + svg_num(b.x) +
         "\" y2=\"" + svg_num(b.y) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
}

inline void emit_rect(std::string& out, const Frame& frame, double x1, double y1, double x2,
                      double y2, const std::string& fill) {
  Point a = frame.point(x1, y1);
  Point b = frame.point(x2, y2);
  const double x = std::min(a.x, b.x);
  const double y = std::min(a.y, b.y);
  out += "<rect x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" width=\"" +
         svg_num(std::fabs(b.x - a.x)) + "\" height=\"" + svg_num(std::fabs(b.y - a.y)) +
         "\" fill=\"" + xml_escape(fill) + "\"/>\n";
}

// Anchors text next to a point, on the side the direction vector points to.
inline void emit_text(std::string& out, const Point& at, const Point& dir,
                      const std::string& text, int font_size) {
  double x = at.x, y = at.y;
  const char* anchor = "middle";
  if (dir.x < -0.5) {
    anchor = "end";
    x -= 6.0;
    y += 4.0;
  } else if (dir.x > 0.5) {
    anchor = "start";
    x += 6.0;
    y += 4.0;
  } else if (dir.y > 0.5) {
    y += 6.0 + font_size;
  } else {
    y -= 8.0;
  }
  out += "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(font_size) + "\">" +
         xml_escape(text) + "</text>\n";
}

}  // namespace detail

// Renders the tree as a standalone SVG document. The reference layout hangs
// the root at the top with the value axis on the left; other orientations
// are right-angle transforms of it. Band rectangles appear only for nodes
// whose band has nonzero width.
inline std::string render_svg(const Multidendrogram& tree, const RenderOptions& options = {}) {
  using detail::Frame;
  using detail::Point;

  const std::size_t n = tree.labels.size();

  double lowest = 0.0;
  double highest = 0.0;
  bool first = true;
  for (const auto& node : tree.nodes) {
    if (node.leaf >= 0) continue;
    if (first) {
      lowest = node.band_lower;
      highest = node.band_upper;
      first = false;
    } else {
      lowest = std::min(lowest, node.band_lower);
      highest = std::max(highest, node.band_upper);
    }
  }
  double v_min = options.axis_min.value_or(std::min(0.0, lowest));
  double v_max = options.axis_max.value_or(highest);
  if (!(v_min < v_max)) {
    if (options.axis_min || options.axis_max)
      throw InvalidAxisRange("axis minimum must be below axis maximum");
    v_max = v_min + 1.0;
  }
  const double tick = options.tick_separation.value_or(detail::nice_tick_step((v_max - v_min) / 10.0));
  if (!(tick > 0.0)) throw InvalidAxisRange("tick separation must be positive");
  if ((v_max - v_min) / tick > 1000.0)
    throw InvalidAxisRange("tick separation produces more than 1000 ticks");
  const int decimals = options.label_decimals.value_or(tree.precision);

  const double W = detail::kMarginAxis + double(n) * detail::kLeafSlot + detail::kMarginFar;
  const double H = detail::kMarginRoot + detail::kPlotSpan + detail::kMarginLeaves;
  const Frame frame{options.orientation, W, H};

  auto y_of = [&](double v) {
    return detail::kMarginRoot + detail::kPlotSpan * (v_max - v) / (v_max - v_min);
  };
  const double y_base = y_of(v_min);

  // Leaf slots follow the canonical child order; internal junctions sit at
  // the mean of their children's positions.
  std::vector<double> node_x(tree.nodes.size(), 0.0);
  std::vector<int> leaf_order;
  leaf_order.reserve(n);
  auto place = [&](auto&& self, int idx) -> double {
    const auto& node = tree.nodes[idx];
    if (node.children.empty()) {
      const double x = detail::kMarginAxis + (double(leaf_order.size()) + 0.5) * detail::kLeafSlot;
      leaf_order.push_back(node.leaf);
      node_x[idx] = x;
      return x;
    }
    double sum = 0.0;
    for (int child : node.children) sum += self(self, child);
    node_x[idx] = sum / double(node.children.size());
    return node_x[idx];
  };
  place(place, tree.root);

  std::string body;

  if (options.show_bands) {
    for (const auto& node : tree.nodes) {
      if (node.leaf >= 0 || !(node.band_upper > node.band_lower)) continue;
      const int node_idx = static_cast<int>(&node - tree.nodes.data());
      const double x_first = node_x[tree.nodes[node_idx].children.front()];
      const double x_last = node_x[tree.nodes[node_idx].children.back()];
      detail::emit_rect(body, frame, x_first, y_of(node.band_lower), x_last,
                        y_of(node.band_upper), options.band_color);
    }
  }

  auto draw = [&](auto&& self, int idx) -> void {
    const auto& node = tree.nodes[idx];
    if (node.children.empty()) return;
    const double y_node = y_of(tree.fusion(idx));
    for (int child : node.children) {
      const double y_child = tree.is_leaf(child) ? y_base : y_of(tree.fusion(child));
      detail::emit_line(body, frame, node_x[child], y_child, node_x[child], y_node);
      self(self, child);
    }
    detail::emit_line(body, frame, node_x[node.children.front()], y_node,
                      node_x[node.children.back()], y_node);
  };
  draw(draw, tree.root);

  if (options.show_axis) {
    const double x_axis = detail::kMarginAxis - 12.0;
    detail::emit_line(body, frame, x_axis, y_of(v_min), x_axis, y_of(v_max));
    const Point dir = frame.direction(-1.0, 0.0);
    for (double v = v_min; v <= v_max + tick * 1e-9; v += tick) {
      detail::emit_line(body, frame, x_axis - 5.0, y_of(v), x_axis, y_of(v));
      Point at = frame.point(x_axis - 5.0, y_of(v));
      at.x += dir.x * 3.0;
      at.y += dir.y * 3.0;
      detail::emit_text(body, at, dir, format_fixed(v, decimals), 10);
    }
  }

  if (options.show_labels) {
    const auto names = sanitized_labels(tree.labels);
    const Point dir = frame.direction(0.0, 1.0);
    for (std::size_t slot = 0; slot < leaf_order.size(); ++slot) {
      const double x = detail::kMarginAxis + (double(slot) + 0.5) * detail::kLeafSlot;
      const Point at = frame.point(x, y_base + 4.0);
      detail::emit_text(body, at, dir, names[leaf_order[slot]], 12);
    }
  }

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(frame.canvas_width()) +
         "\" height=\"" + detail::svg_num(frame.canvas_height()) + "\" viewBox=\"0 0 " +
         detail::svg_num(frame.canvas_width()) + " " + detail::svg_num(frame.canvas_height()) +
         "\">\n";
  out += body;
  out += "</svg>\n";
  return out;
}

}  // namespace mdendro
