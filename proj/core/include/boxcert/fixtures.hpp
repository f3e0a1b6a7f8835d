#pragma once

// Desk-scale corpus of graphs, systems and specifications, a random graph
// generator for property tests, and brute-force oracles that only use exact
// evaluation.

#include "boxcert/control.hpp"
#include "boxcert/spec.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace boxcert {

struct OracleResult {
  bool violated = false;
  Vector x;              // first violating point, or the argmin
  int clause_index = -1;
  double margin = 0.0;
  double min_value = 0.0;  // grid_min only
  long evaluations = 0;
};

/// Evaluates the spec on a uniform grid with `resolution` points per input
/// dimension, then on `random_points` uniform samples. Input dimension must
/// be at most 3.
OracleResult grid_oracle(const Graph& graph, const SpecCNF& spec, const Box& box, int resolution,
                         int random_points = 10000, std::uint64_t seed = 7);

/// Smallest objᵀF(x) over the same point set, skipping points that violate
/// `constraints` when given. min_value is +inf when no point is feasible.
OracleResult grid_min(const Graph& graph, const Vector& objective, const Box& box, int resolution,
                      const SpecCNF* constraints = nullptr, int random_points = 10000,
                      std::uint64_t seed = 7);

/// Layered random graph: each layer is an Affine map to `width` followed by
/// one operator drawn from `ops` (Affine alone means no extra operator),
/// then a final Affine to `output_dim`. Weights are normal with standard
/// deviation 1/sqrt(fan-in).
Graph random_graph(std::uint64_t seed, int depth, int width, const std::vector<OpKind>& ops,
                   int input_dim = 1, int output_dim = 1);

namespace fixtures {

/// x -> Scale(2) -> Affine(1, -1) -> ReLU -> Affine(1, 3), i.e. ReLU(2x-1)+3.
Graph toy_graph();
Graph identity_graph(int dim = 1);
Graph linear_graph(double a);         // a x
Graph square_minus_one();             // x^2 - 1
Graph sin_graph();                    // sin x
Graph tanh_net(std::uint64_t seed);   // 2 -> 8 -> 8 -> 1 tanh network
Graph sigmoid_net(std::uint64_t seed);  // 2 -> 6 -> 1 sigmoid network with a sin feature
Graph relu_net(std::uint64_t seed);   // 2 -> 8 -> 8 -> 1 ReLU network

/// Scalar g(x) = a x with V(x) = x^2.
SystemBundle scalar_linear(double a = 0.5);
/// x+ = A x with A = [[0.9, 0.2], [0, 0.8]] and V(x) = xᵀPx, P solving
/// P = AᵀPA + I by fixed-point iteration.
SystemBundle linear_2d();
Matrix linear_2d_P();
/// xdot = s (-x + 0.1 sin x) with V = x^2; s = -1 flips the dynamics.
SystemBundle continuous_scalar(double s = 1.0);
/// x+ = x + 0.1 NN(x) with a 1 -> 16 -> 16 -> 1 ReLU network.
SystemBundle residual_net(std::uint64_t seed = 3);
/// x+ = 0.5 x + w, V = x^2, psi = scale w^2.
SystemBundle robust_scalar(double psi_scale);
/// xdot = u, h = 1 - x^2.
SystemBundle barrier_scalar();

/// y = [x1^2, (u - 6)^2] with x1 = 1 + 0.5u + 0.2 sin(2u), input u.
Graph mpc_graph();
/// y = sin(3 x0) - 0.3 x0 + 1.2 + 0.001 x1 on [-1, 1] x [-10, 10]: one
/// sensitive and one long, flat edge. The minimum is near x0 = -pi/6.
Graph branching_graph();

/// Spec y > threshold over a box for a scalar-output graph.
SpecCNF threshold_spec(const Box& box, double threshold);

}  // namespace fixtures

}  // namespace boxcert
