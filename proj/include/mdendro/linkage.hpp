#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "numeric.hpp"

namespace mdendro {

enum class Method {
  single_linkage,
  complete_linkage,
  unweighted_average,
  weighted_average,
  unweighted_centroid,
  weighted_centroid,
  ward,
};

inline constexpr std::array<Method, 7> all_methods = {
    Method::single_linkage,     Method::complete_linkage,  Method::unweighted_average,
    Method::weighted_average,   Method::unweighted_centroid, Method::weighted_centroid,
    Method::ward,
};

inline std::string_view method_name(Method method) {
  switch (method) {
    case Method::single_linkage: return "single_linkage";
    case Method::complete_linkage: return "complete_linkage";
    case Method::unweighted_average: return "unweighted_average";
    case Method::weighted_average: return "weighted_average";
    case Method::unweighted_centroid: return "unweighted_centroid";
    case Method::weighted_centroid: return "weighted_centroid";
    case Method::ward: return "ward";
  }
  return "unknown";
}

// Accepts any case; '-', '_' and spaces are interchangeable.
inline std::optional<Method> parse_method(std::string_view name) {
  std::string key;
  key.reserve(name.size());
  for (char c : name) {
    if (c == '-' || c == ' ') c = '_';
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    key.push_back(c);
  }
  for (Method m : all_methods)
    if (key == method_name(m)) return m;
  return std::nullopt;
}

struct PairCoefficients {
  double alpha_i = 0.0;
  double alpha_i2 = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

// Coefficients for updating the distance from the new cluster (i u i') to a
// third cluster j, given the member counts of the three clusters. Every
// coefficient is one IEEE division of exactly representable integers, so
// equal rationals yield identical doubles.
inline PairCoefficients pair_coefficients(Method method, std::size_t size_i, std::size_t size_i2,
                                          std::size_t size_j) {
  PairCoefficients c;
  const std::size_t si = size_i, si2 = size_i2, sj = size_j;
  switch (method) {
    case Method::single_linkage:
      c.alpha_i = c.alpha_i2 = 0.5;
      c.gamma = -0.5;
      break;
    case Method::complete_linkage:
      c.alpha_i = c.alpha_i2 = 0.5;
      c.gamma = 0.5;
      break;
    case Method::unweighted_average:
      c.alpha_i = double(si) / double(si + si2);
      c.alpha_i2 = double(si2) / double(si + si2);
      break;
    case Method::weighted_average:
      c.alpha_i = c.alpha_i2 = 0.5;
      break;
    case Method::unweighted_centroid:
      c.alpha_i = double(si) / double(si + si2);
      c.alpha_i2 = double(si2) / double(si + si2);
      c.beta = -(double(si * si2) / double((si + si2) * (si + si2)));
      break;
    case Method::weighted_centroid:
      c.alpha_i = c.alpha_i2 = 0.5;
      c.beta = -0.25;
      break;
    case Method::ward:
      c.alpha_i = double(si + sj) / double(si + si2 + sj);
      c.alpha_i2 = double(si2 + sj) / double(si + si2 + sj);
      c.beta = -(double(sj) / double(si + si2 + sj));
      break;
  }
  return c;
}

// Distance from the merge of clusters i and i' to cluster j:
//   alpha_i d(i,j) + alpha_i' d(i',j) + beta d(i,i') + gamma |d(i,j) - d(i',j)|
inline double pair_update(Method method, std::size_t size_i, std::size_t size_i2,
                          std::size_t size_j, double d_ij, double d_i2j, double d_ii2) {
  const PairCoefficients c = pair_coefficients(method, size_i, size_i2, size_j);
  std::vector<double> terms{c.alpha_i * d_ij, c.alpha_i2 * d_i2j, c.beta * d_ii2,
                            c.gamma * std::fabs(d_ij - d_i2j)};
  return stable_sum(terms);
}

// Distances feeding one supercluster-to-supercluster evaluation. I and J are
// groups of clusters; cross(a, b) is the distance between the a-th member of
// I and the b-th member of J, and the within tables hold the distances
// between members of the same group (upper triangle, a < b).
struct GroupDistanceInput {
  std::vector<std::size_t> sizes_i;  // member counts |X_i|
  std::vector<std::size_t> sizes_j;
  std::vector<double> cross;     // row-major |I| x |J|
  std::vector<double> within_i;  // |I| choose 2, row-major upper triangle
  std::vector<double> within_j;

  static std::size_t tri_index(std::size_t count, std::size_t a, std::size_t b) {
    assert(a < b && b < count);
    return a * (2 * count - a - 1) / 2 + (b - a - 1);
  }

  double cross_at(std::size_t a, std::size_t b) const { return cross[a * sizes_j.size() + b]; }
  double within_i_at(std::size_t a, std::size_t b) const {
    return within_i[tri_index(sizes_i.size(), a, b)];
  }
  double within_j_at(std::size_t a, std::size_t b) const {
    return within_j[tri_index(sizes_j.size(), a, b)];
  }
  double d_max() const { return *std::max_element(cross.begin(), cross.end()); }
  double d_min() const { return *std::min_element(cross.begin(), cross.end()); }
};

// Per-pair coefficients of the group recurrence. The delta switch exists
// only for the two gamma methods; the others never read it.
class GroupCoefficients {
 public:
  GroupCoefficients(Method method, std::vector<std::size_t> sizes_i,
                    std::vector<std::size_t> sizes_j)
      : method_(method), sizes_i_(std::move(sizes_i)), sizes_j_(std::move(sizes_j)) {
    total_i_ = std::accumulate(sizes_i_.begin(), sizes_i_.end(), std::size_t{0});
    total_j_ = std::accumulate(sizes_j_.begin(), sizes_j_.end(), std::size_t{0});
  }

  std::size_t members_i() const { return sizes_i_.size(); }
  std::size_t members_j() const { return sizes_j_.size(); }

  double alpha(std::size_t a, std::size_t b) const {
    switch (method_) {
      case Method::single_linkage:
      case Method::complete_linkage:
      case Method::weighted_average:
      case Method::weighted_centroid:
        return 1.0 / double(members_i() * members_j());
      case Method::unweighted_average:
      case Method::unweighted_centroid:
        return double(sizes_i_[a] * sizes_j_[b]) / double(total_i_ * total_j_);
      case Method::ward:
        return double(sizes_i_[a] + sizes_j_[b]) / double(total_i_ + total_j_);
    }
    return 0.0;
  }

  double beta_within_i(std::size_t a, std::size_t b) const {
    return beta_within(a, b, sizes_i_, total_i_, members_i(), total_j_);
  }
  double beta_within_j(std::size_t a, std::size_t b) const {
    return beta_within(a, b, sizes_j_, total_j_, members_j(), total_i_);
  }

  bool has_gamma() const {
    return method_ == Method::single_linkage || method_ == Method::complete_linkage;
  }
  double gamma(std::size_t, std::size_t) const {
    return has_gamma() ? 1.0 / double(members_i() * members_j()) : 0.0;
  }
  int delta() const {
    assert(has_gamma());
    return method_ == Method::complete_linkage ? 1 : 0;
  }

 private:
  double beta_within(std::size_t a, std::size_t b, const std::vector<std::size_t>& sizes,
                     std::size_t own_total, std::size_t own_members,
                     std::size_t other_total) const {
    switch (method_) {
      case Method::unweighted_centroid:
        return -(double(sizes[a] * sizes[b]) / double(own_total * own_total));
      case Method::weighted_centroid:
        return -(1.0 / double(own_members * own_members));
      case Method::ward:
        return -(double(other_total * (sizes[a] + sizes[b])) /
                 double(own_total * (own_total + other_total)));
      default:
        return 0.0;
    }
  }

  Method method_;
  std::vector<std::size_t> sizes_i_;
  std::vector<std::size_t> sizes_j_;
  std::size_t total_i_ = 0;
  std::size_t total_j_ = 0;
};

// Distance between two superclusters:
//   sum alpha_ij D(i,j) + sum beta_ii' D(i,i') + sum beta_jj' D(j,j')
//   + delta sum gamma_ij [d_max - D(i,j)] - (1 - delta) sum gamma_ij [D(i,j) - d_min]
// Terms are accumulated order-independently, so member enumeration order
// cannot change the result.
inline double group_distance(Method method, const GroupDistanceInput& in) {
  const std::size_t p = in.sizes_i.size();
  const std::size_t q = in.sizes_j.size();
  assert(p >= 1 && q >= 1 && in.cross.size() == p * q);

  const GroupCoefficients coef(method, in.sizes_i, in.sizes_j);
  std::vector<double> terms;
  terms.reserve(p * q * 2 + in.within_i.size() + in.within_j.size());

  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < q; ++b) terms.push_back(coef.alpha(a, b) * in.cross_at(a, b));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      terms.push_back(coef.beta_within_i(a, b) * in.within_i_at(a, b));
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a + 1; b < q; ++b)
      terms.push_back(coef.beta_within_j(a, b) * in.within_j_at(a, b));

  if (coef.has_gamma()) {
    if (coef.delta() == 1) {
      const double d_max = in.d_max();
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < q; ++b)
          terms.push_back(coef.gamma(a, b) * (d_max - in.cross_at(a, b)));
    } else {
      const double d_min = in.d_min();
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < q; ++b)
          terms.push_back(-(coef.gamma(a, b) * (in.cross_at(a, b) - d_min)));
    }
  }
  return stable_sum(terms);
}

}  // namespace mdendro
