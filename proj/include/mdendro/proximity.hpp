#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace mdendro {

enum class Measure { Distance, Weight };

enum class FormatKind { MatrixLike, ListLike };

enum class ParseErrc {
  empty_input,
  empty_field,
  ragged_rows,
  non_numeric_cell,
  labels_both_row_and_column,
  asymmetric_matrix,
  non_zero_diagonal,
  duplicate_label,
  too_few_nodes,
  bad_field_count,
  self_distance_line,
  conflicting_symmetric_pair,
  missing_pair,
  value_out_of_unit_interval,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrc code, std::string message, long line = -1)
      : std::runtime_error(std::move(message)), code_(code), line_(line) {}

  ParseErrc code() const { return code_; }
  long line() const { return line_; }  // 1-based input line, -1 when not tied to one

 private:
  ParseErrc code_;
  long line_;
};

// Proximity data ready for clustering: labels plus a symmetric value table
// with a zero diagonal. `precision` is the number of decimal digits the
// values are currently rounded to; `source_decimals` records the maximum
// number of decimals seen in the input text.
struct ProximityData {
  std::vector<std::string> labels;
  SymMatrix values;
  Measure measure = Measure::Distance;
  int precision = 0;
  int source_decimals = 0;

  std::size_t size() const { return labels.size(); }
};

namespace detail {

inline bool is_hard_separator(char c) { return c == ';' || c == ',' || c == '|'; }
inline bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

struct TextLine {
  long number = 0;  // 1-based position in the input, counting skipped lines
  std::vector<std::string> fields;
};

// Splits the input into data lines. Blank lines and lines whose first
// non-blank character is '#' are skipped. Fields are separated by runs of
// whitespace or by the single-character separators ';' ',' '|'; a separator
// pair with nothing between them is an empty field and is rejected, while
// whitespace runs never produce empty fields.
inline std::vector<TextLine> tokenize(std::string_view text) {
  std::vector<TextLine> lines;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    ++line_no;

    std::size_t first = 0;
    while (first < line.size() && is_blank(line[first])) ++first;
    const bool skip = first == line.size() || line[first] == '#';
    if (!skip) {
      TextLine out;
      out.number = line_no;
      std::string token;
      bool in_segment = false;    // a hard separator was opened and awaits a token
      bool segment_has_token = true;
      auto flush = [&] {
        if (!token.empty()) {
          out.fields.push_back(std::move(token));
          token.clear();
          segment_has_token = true;
        }
      };
      for (char c : line) {
        if (is_hard_separator(c)) {
          flush();
          if (!segment_has_token)
            throw ParseError(ParseErrc::empty_field,
                             "empty field between separators on line " + std::to_string(line_no),
                             line_no);
          segment_has_token = false;
          in_segment = true;
        } else if (is_blank(c)) {
          flush();
        } else {
          token.push_back(c);
        }
      }
      flush();
      if (in_segment && !segment_has_token)
        throw ParseError(ParseErrc::empty_field,
                         "empty field after trailing separator on line " + std::to_string(line_no),
                         line_no);
      if (!out.fields.empty()) lines.push_back(std::move(out));
    }

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return lines;
}

inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

inline bool is_number(const std::string& token) {
  double ignored;
  return parse_double(token, ignored);
}

// Decimal digits a token carries: "0.400" -> 3, "1" -> 0, "2.5e-2" -> 3.
inline int decimals_in(const std::string& token) {
  int frac = 0;
  int exponent = 0;
  std::size_t i = token.find_first_of(".eE");
  if (i != std::string::npos && token[i] == '.') {
    ++i;
    while (i < token.size() && token[i] >= '0' && token[i] <= '9') {
      ++frac;
      ++i;
    }
  }
  if (i != std::string::npos && i < token.size() && (token[i] == 'e' || token[i] == 'E')) {
    std::from_chars(token.data() + i + 1, token.data() + token.size(), exponent);
  }
  int result = frac - exponent;
  return result < 0 ? 0 : result;
}

inline void check_labels(const std::vector<std::string>& labels) {
  std::set<std::string> seen;
  for (const auto& label : labels)
    if (!seen.insert(label).second)
      throw ParseError(ParseErrc::duplicate_label, "duplicate label '" + label + "'");
}

}  // namespace detail

// Parses a full square matrix, with an optional label row or an optional
// label column (not both). Labels default to "1".."n".
inline ProximityData parse_matrix(std::string_view text, Measure measure = Measure::Distance) {
  auto lines = detail::tokenize(text);
  if (lines.empty()) throw ParseError(ParseErrc::empty_input, "input contains no data lines");

  const std::size_t row_count = lines.size();
  const std::size_t k = lines[0].fields.size();
  bool uniform = true;
  std::size_t odd_row = 0;
  for (std::size_t r = 1; r < row_count; ++r) {
    if (lines[r].fields.size() != k) {
      uniform = false;
      odd_row = r;
      break;
    }
  }

  std::vector<std::string> labels;
  std::size_t n = 0;
  std::size_t first_data = 0;
  bool label_column = false;

  if (!uniform) {
    // A label row over rows that each start with a label reads as n fields
    // followed by lines of n+1 fields; that redundant form is rejected.
    bool both = row_count >= 2 && k + 1 == lines[1].fields.size();
    for (std::size_t r = 2; both && r < row_count; ++r)
      both = lines[r].fields.size() == k + 1;
    if (both)
      throw ParseError(ParseErrc::labels_both_row_and_column,
                       "matrix has both a label row and a label column; keep only one");
    throw ParseError(ParseErrc::ragged_rows,
                     "line " + std::to_string(lines[odd_row].number) + " has " +
                         std::to_string(lines[odd_row].fields.size()) + " fields, expected " +
                         std::to_string(k),
                     lines[odd_row].number);
  }

  if (row_count == k) {
    bool plain = true;
    for (const auto& f : lines[0].fields)
      if (!detail::is_number(f)) plain = false;
    if (!plain) {
      bool both = k >= 2;
      for (std::size_t r = 1; both && r < row_count; ++r) {
        if (detail::is_number(lines[r].fields[0])) both = false;
        for (std::size_t c = 1; both && c < k; ++c)
          if (!detail::is_number(lines[r].fields[c])) both = false;
      }
      if (both)
        throw ParseError(ParseErrc::labels_both_row_and_column,
                         "matrix has both a label row and a label column; keep only one");
    }
    n = k;
  } else if (row_count == k + 1) {
    labels = lines[0].fields;
    first_data = 1;
    n = k;
  } else if (row_count + 1 == k) {
    label_column = true;
    n = row_count;
  } else {
    throw ParseError(ParseErrc::ragged_rows,
                     std::to_string(row_count) + " rows of " + std::to_string(k) +
                         " fields do not form a square matrix");
  }

  if (n < 2) throw ParseError(ParseErrc::too_few_nodes, "need at least two nodes");

  std::vector<double> cells(n * n);
  int max_decimals = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& line = lines[first_data + r];
    const std::size_t offset = label_column ? 1 : 0;
    if (label_column) labels.push_back(line.fields[0]);
    for (std::size_t c = 0; c < n; ++c) {
      const std::string& token = line.fields[offset + c];
      double v;
      if (!detail::parse_double(token, v))
        throw ParseError(ParseErrc::non_numeric_cell,
                         "non-numeric cell '" + token + "' on line " + std::to_string(line.number),
                         line.number);
      cells[r * n + c] = v;
      if (r != c) max_decimals = std::max(max_decimals, detail::decimals_in(token));
    }
  }

  if (labels.empty())
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  detail::check_labels(labels);

  for (std::size_t i = 0; i < n; ++i)
    if (cells[i * n + i] != 0.0)
      throw ParseError(ParseErrc::non_zero_diagonal,
                       "diagonal entry for '" + labels[i] + "' is " +
                           format_shortest(cells[i * n + i]) + ", expected 0",
                       lines[first_data + i].number);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (cells[i * n + j] != cells[j * n + i])
        throw ParseError(ParseErrc::asymmetric_matrix,
                         "asymmetric pair ('" + labels[i] + "', '" + labels[j] + "'): " +
                             format_shortest(cells[i * n + j]) + " vs " +
                             format_shortest(cells[j * n + i]));

  ProximityData data;
  data.labels = std::move(labels);
  data.values = SymMatrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) data.values.set(i, j, cells[i * n + j]);
  data.measure = measure;
  data.precision = max_decimals;
  data.source_decimals = max_decimals;
  return data;
}

// Parses "label label value" lines. Labels are ordered by first appearance;
// every unordered pair must appear at least once, repeats must agree. When
// `equality_precision` is given, repeated pairs are compared after rounding
// to that many decimals; otherwise they must match exactly.
inline ProximityData parse_list(std::string_view text, Measure measure = Measure::Distance,
                                std::optional<int> equality_precision = std::nullopt) {
  auto lines = detail::tokenize(text);
  if (lines.empty()) throw ParseError(ParseErrc::empty_input, "input contains no data lines");

  std::vector<std::string> labels;
  std::map<std::string, std::size_t> index_of;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = index_of.try_emplace(name, labels.size());
    if (inserted) labels.push_back(name);
    return it->second;
  };

  std::map<std::pair<std::size_t, std::size_t>, double> pairs;
  int max_decimals = 0;
  for (const auto& line : lines) {
    if (line.fields.size() != 3)
      throw ParseError(ParseErrc::bad_field_count,
                       "line " + std::to_string(line.number) + " has " +
                           std::to_string(line.fields.size()) + " fields, expected 3",
                       line.number);
    double value;
    if (!detail::parse_double(line.fields[2], value))
      throw ParseError(ParseErrc::non_numeric_cell,
                       "non-numeric value '" + line.fields[2] + "' on line " +
                           std::to_string(line.number),
                       line.number);
    if (line.fields[0] == line.fields[1])
      throw ParseError(ParseErrc::self_distance_line,
                       "line " + std::to_string(line.number) + " relates '" + line.fields[0] +
                           "' to itself",
                       line.number);
    const std::size_t a = intern(line.fields[0]);
    const std::size_t b = intern(line.fields[1]);
    const auto key = std::minmax(a, b);
    auto [it, inserted] = pairs.try_emplace(key, value);
    if (!inserted) {
      double seen = it->second, now = value;
      if (equality_precision) {
        seen = round_to(seen, *equality_precision);
        now = round_to(now, *equality_precision);
      }
      if (seen != now)
        throw ParseError(ParseErrc::conflicting_symmetric_pair,
                         "pair ('" + line.fields[0] + "', '" + line.fields[1] + "') given as " +
                             format_shortest(it->second) + " and " + format_shortest(value),
                         line.number);
    }
    max_decimals = std::max(max_decimals, detail::decimals_in(line.fields[2]));
  }

  const std::size_t n = labels.size();
  if (n < 2) throw ParseError(ParseErrc::too_few_nodes, "need at least two nodes");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!pairs.count({i, j}))
        throw ParseError(ParseErrc::missing_pair,
                         "no value for pair ('" + labels[i] + "', '" + labels[j] + "')");

  ProximityData data;
  data.labels = std::move(labels);
  data.values = SymMatrix(n);
  for (const auto& [key, value] : pairs) data.values.set(key.first, key.second, value);
  data.measure = measure;
  data.precision = max_decimals;
  data.source_decimals = max_decimals;
  return data;
}

// Classifies input text as matrix-like or list-like. Lists are recognized by
// every line carrying exactly three fields with a numeric third; when those
// same lines also form a plausible square matrix, the matrix reading wins.
inline FormatKind detect_format(std::string_view text) {
  std::vector<detail::TextLine> lines;
  try {
    lines = detail::tokenize(text);
  } catch (const ParseError&) {
    return FormatKind::MatrixLike;  // let parse_matrix report the defect
  }
  if (lines.empty()) throw ParseError(ParseErrc::empty_input, "input contains no data lines");

  for (const auto& line : lines)
    if (line.fields.size() != 3 || !detail::is_number(line.fields[2]))
      return FormatKind::MatrixLike;

  auto numeric_from = [](const detail::TextLine& line, std::size_t from) {
    for (std::size_t c = from; c < line.fields.size(); ++c)
      if (!detail::is_number(line.fields[c])) return false;
    return true;
  };
  const std::size_t rows = lines.size();
  bool plausible = false;
  if (rows == 3) {
    plausible = true;
    for (const auto& line : lines) plausible = plausible && numeric_from(line, 0);
  } else if (rows == 2) {
    plausible = numeric_from(lines[0], 1) && numeric_from(lines[1], 1);
  } else if (rows == 4) {
    plausible = true;
    for (std::size_t r = 1; r < rows; ++r) plausible = plausible && numeric_from(lines[r], 0);
  }
  return plausible ? FormatKind::MatrixLike : FormatKind::ListLike;
}

inline ProximityData parse_proximities(std::string_view text, Measure measure = Measure::Distance) {
  return detect_format(text) == FormatKind::MatrixLike ? parse_matrix(text, measure)
                                                       : parse_list(text, measure);
}

// Decimal digits needed to reproduce the values as written.
inline int infer_precision(const ProximityData& data) { return data.source_decimals; }

inline ProximityData apply_precision(ProximityData data, int precision) {
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      data.values.set(i, j, round_to(data.values(i, j), precision));
  data.precision = precision;
  return data;
}

// Maps similarities in [0, 1] to dissimilarities 1 - s. The diagonal stays 0.
inline ProximityData similarity_to_dissimilarity(const ProximityData& data) {
  if (data.measure != Measure::Weight)
    throw std::invalid_argument("similarity_to_dissimilarity expects weight data");
  ProximityData out = data;
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = data.values(i, j);
      if (s < 0.0 || s > 1.0)
        throw ParseError(ParseErrc::value_out_of_unit_interval,
                         "similarity for ('" + data.labels[i] + "', '" + data.labels[j] +
                             "') is " + format_shortest(s) + ", outside [0, 1]");
      out.values.set(i, j, 1.0 - s);
    }
  out.measure = Measure::Distance;
  return out;
}

}  // namespace mdendro
