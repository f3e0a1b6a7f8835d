#pragma once

// Sound per-operator linear relaxations on a preactivation box: for every
// point x in the box,
//   sum_j lower[j] x_j + lower_bias  <=  h(x)  <=  sum_j upper[j] x_j + upper_bias.

#include "boxcert/interval.hpp"

#include <unordered_map>
#include <vector>

namespace boxcert {

/// Coefficient block of a relaxation with respect to one parent. Elementwise
/// operators produce diagonal blocks.
class CoeffBlock {
 public:
  CoeffBlock() = default;
  static CoeffBlock dense(Matrix m);
  static CoeffBlock diagonal(Vector d);

  bool is_diagonal() const { return diagonal_; }
  int rows() const;
  int cols() const;
  Matrix to_dense() const;
  const Vector& diag() const { return diag_; }
  const Matrix& matrix() const { return dense_; }

  /// coeffs * block
  Matrix left_multiply(const Matrix& coeffs) const;
  /// block * x
  Vector apply(const Vector& x) const;

 private:
  bool diagonal_ = false;
  Matrix dense_;
  Vector diag_;
};

struct LinearRelaxation {
  std::vector<CoeffBlock> lower;  // one per parent slot
  std::vector<CoeffBlock> upper;
  Vector lower_bias;
  Vector upper_bias;
  /// Lower and upper planes coincide (affine operators).
  bool exact = false;

  /// Evaluates the lower / upper planes at per-parent points.
  Vector lower_at(const std::vector<Vector>& xs) const;
  Vector upper_at(const std::vector<Vector>& xs) const;
};

/// Per-parent preactivation intervals of the node being relaxed.
using PreBox = std::vector<IntervalVector>;

struct RelaxParams {
  /// Lower slope of unstable ReLU neurons, per node; absent nodes use
  /// default_relu_alpha.
  std::unordered_map<NodeIndex, Vector> relu_alpha;
  /// McCormick plane selection, 1 or 2 (see relax_mul).
  int mul_lower_choice = 1;
  int mul_upper_choice = 1;
};

/// Steeper side of the triangle envelope: 1 when u > -l, else 0.
double default_relu_alpha(double l, double u);

/// Line  slope * x + bias.
struct Line {
  double slope = 0.0;
  double bias = 0.0;
  double at(double x) const { return slope * x + bias; }
};

struct ScalarRelaxation {
  Line lower;
  Line upper;
};

/// Outward bias padding applied to lines whose soundness relies on a
/// numerical search or a floating-point correction.
inline constexpr double kRelaxPad = 1e-9;

LinearRelaxation relax_relu(const IntervalVector& pre, const Vector* alpha = nullptr);
LinearRelaxation relax_sin(const IntervalVector& pre);
LinearRelaxation relax_cos(const IntervalVector& pre);
LinearRelaxation relax_sshape(OpKind kind, const IntervalVector& pre);
LinearRelaxation relax_square(const IntervalVector& pre);
LinearRelaxation relax_heaviside(const IntervalVector& pre);
/// McCormick planes for x*y. Lower 1: l_y x + l_x y - l_x l_y; lower 2:
/// u_y x + u_x y - u_x u_y. Upper 1: l_y x + u_x y - u_x l_y; upper 2:
/// u_y x + l_x y - l_x u_y.
LinearRelaxation relax_mul(const IntervalVector& x, const IntervalVector& y, int lower_choice = 1,
                           int upper_choice = 1);
/// Exact relaxation of  sum_j blocks[j] x_j + bias.
LinearRelaxation relax_affine(const std::vector<Matrix>& blocks, const Vector& bias);

/// Scalar relaxations of the smooth elementwise maps.
ScalarRelaxation relax_sin_scalar(double l, double u);
ScalarRelaxation relax_tanh_scalar(double l, double u);
ScalarRelaxation relax_sigmoid_scalar(double l, double u);

/// Dispatch over the node's operator kind. Throws GraphError naming the kind
/// for Input nodes.
LinearRelaxation relax_node(const Graph& graph, NodeIndex i, const PreBox& pre,
                            const RelaxParams& params);

}  // namespace boxcert
