#pragma once

// Gradient graphs and exact point gradients.

#include "boxcert/graph.hpp"

#include <utility>

namespace boxcert {

/// Graph whose output is [F(x), dF/dx] for a scalar-output source graph.
/// Slices are half-open index ranges into the output vector.
struct AugmentedGraph {
  Graph graph;
  std::pair<int, int> value_slice;
  std::pair<int, int> grad_slice;
};

/// Appends reverse-mode adjoint nodes to a scalar-output graph. ReLU
/// derivatives become Mul(adjoint, Heaviside(x)). Throws GraphError naming
/// the operator when no derivative rule applies.
AugmentedGraph augment_with_jacobian(const Graph& graph);

/// Exact reverse-mode gradient of cotangentᵀ F at x, over the concatenated
/// input. An empty cotangent means 1 (scalar outputs only). The ReLU and
/// Heaviside derivatives at 0 are taken as 0.
Vector point_gradient(const Graph& graph, const Vector& x, const Vector& cotangent = Vector());

}  // namespace boxcert
