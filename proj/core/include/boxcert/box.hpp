#pragma once

#include "boxcert/graph.hpp"

#include <utility>

namespace boxcert {

/// Axis-aligned box [lower, upper] over the concatenated input vector.
struct Box {
  Vector lower;
  Vector upper;

  Box() = default;
  Box(Vector lo, Vector hi);
  /// Degenerate box {x}.
  static Box point(const Vector& x);
  /// Box from interleaved pairs (l0, u0, l1, u1, ...).
  static Box from_pairs(const std::vector<double>& pairs);

  int dim() const { return static_cast<int>(lower.size()); }
  Vector width() const { return upper - lower; }
  Vector center() const { return 0.5 * (lower + upper); }
  double max_width() const;
  bool contains(const Vector& x, double slack = 0.0) const;
  bool contains(const Box& other) const;
  /// Product of widths over the dimensions where `reference` has positive
  /// width. Used for partition accounting.
  double volume(const Box& reference) const;
  Vector clamp(const Vector& x) const;
  /// Children sharing the midpoint of dimension `dim`.
  std::pair<Box, Box> bisect(int dim) const;

  friend bool operator==(const Box& a, const Box& b) {
    return a.lower == b.lower && a.upper == b.upper;
  }
};

/// Throws GraphError if lower > upper anywhere or the dimension does not
/// match the graph's concatenated input.
void check_box(const Box& box, const Graph& graph);

}  // namespace boxcert
