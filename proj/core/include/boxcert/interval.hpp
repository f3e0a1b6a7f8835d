#pragma once

#include "boxcert/box.hpp"

#include <vector>

namespace boxcert {

/// Elementwise interval [lower, upper] on a node's output.
struct IntervalVector {
  Vector lower;
  Vector upper;

  IntervalVector() = default;
  IntervalVector(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {}
  static IntervalVector point(const Vector& v) { return {v, v}; }
  static IntervalVector from_box(const Box& b) { return {b.lower, b.upper}; }

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& v, double slack = 0.0) const;
  /// Elementwise intersection; both operands must be sound for the same set.
  IntervalVector intersect(const IntervalVector& other) const;
  bool subset_of(const IntervalVector& other, double tol = 0.0) const;
};

/// Concrete elementwise bounds on a graph output.
using ScalarBounds = IntervalVector;

/// Scalar range of sin / cos over [l, u].
std::pair<double, double> sin_range(double l, double u);
std::pair<double, double> cos_range(double l, double u);

/// Interval extension of one node's primitive map.
IntervalVector interval_op(const Graph& graph, NodeIndex i,
                           const std::vector<const IntervalVector*>& parents);

}  // namespace boxcert
