#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace mdendro {

// Rounds half away from zero at `decimals` places: round_to(0.445, 2) == 0.45
// and round_to(-0.445, 2) == -0.45. Applying it twice is a no-op, so rounded
// distance tables can be compared with plain == when looking for ties.
inline double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  if (!std::isfinite(scale) || scale <= 0.0) return value;
  const double scaled = value * scale;
  if (!std::isfinite(scaled)) return value;
  return std::round(scaled) / scale;
}

// Fixed-point formatting, locale independent. -0 collapses to 0.
inline std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed,
                           decimals < 0 ? 0 : decimals);
  return std::string(buf, res.ptr);
}

// Shortest round-trip representation; distinct doubles map to distinct strings.
inline std::string format_shortest(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// Order-independent sum: identical multisets of terms produce bit-identical
// results no matter how the caller enumerated them.
inline double stable_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

// Symmetric matrix with a fixed zero diagonal; only the strict upper triangle
// is stored, so symmetry holds by construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n, double fill = 0.0) : n_(n), cells_(n * (n - 1) / 2, fill) {}

  std::size_t size() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const {
    return i == j ? 0.0 : cells_[index(i, j)];
  }

  void set(std::size_t i, std::size_t j, double v) {
    assert(i != j);
    cells_[index(i, j)] = v;
  }

  bool operator==(const SymMatrix&) const = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    assert(i != j && i < n_ && j < n_);
    if (i > j) std::swap(i, j);
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  std::vector<double> cells_;
};

}  // namespace mdendro
