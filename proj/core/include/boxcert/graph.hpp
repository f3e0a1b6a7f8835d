#pragma once

// Computation graphs over flat vectors: data model, validation and exact
// point evaluation.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace boxcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using NodeIndex = int;

enum class OpKind {
  Input,
  Constant,
  Affine,
  Add,
  Sub,
  Neg,
  Mul,
  Scale,
  ReLU,
  Tanh,
  Sigmoid,
  Sin,
  Cos,
  Square,
  Concat,
  Slice,
  SumReduce,
  // Unit step, 1 for x > 0 and 0 otherwise. Only produced by jacobian
  // augmentation as the derivative gate of ReLU.
  Heaviside,
};

/// File tag of an operator ("affine", "relu", ...).
std::string_view op_tag(OpKind kind);
/// Inverse of op_tag; nullopt for unknown tags.
std::optional<OpKind> op_from_tag(std::string_view tag);

/// True for operators whose relaxation is exact (affine in their parents).
bool is_linear_op(OpKind kind);
/// True for elementwise single-parent operators (ReLU, Tanh, Sin, ...).
bool is_elementwise_op(OpKind kind);

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One operator node as authored. Payload fields are only meaningful for
/// the kinds that use them.
struct Node {
  std::string id;
  OpKind kind = OpKind::Input;
  std::vector<std::string> parents;
  int dim = 0;  // Input: declared; other kinds: inferred during validation

  Matrix weight;       // Affine: rows = dim, cols = sum of parent dims
  Vector bias;         // Affine bias (empty means zero)
  Vector value;        // Constant payload
  double factor = 1.0; // Scale
  int lo = 0, hi = 0;  // Slice [lo, hi)
};

/// Unvalidated graph description. Input nodes live in `nodes` too and are
/// listed, in declaration order, in `input_ids`.
struct GraphDef {
  std::string name;
  std::vector<Node> nodes;
  std::vector<std::string> input_ids;
  std::string output_id;
};

struct ValidationReport {
  bool ok = false;
  std::vector<std::string> violations;
  std::vector<NodeIndex> topo_order;  // filled when ok
  std::vector<int> dims;              // inferred output dims, filled when ok

  explicit operator bool() const { return ok; }
};

ValidationReport validate(const GraphDef& def);

/// Validated, immutable computation graph. Inputs are concatenated, in
/// declaration order, into one input vector of size input_dim().
class Graph {
 public:
  /// Validates and compiles; throws GraphError listing every violation.
  static Graph compile(GraphDef def);

  const GraphDef& def() const { return def_; }
  const std::string& name() const { return def_.name; }

  int size() const { return static_cast<int>(def_.nodes.size()); }
  const Node& node(NodeIndex i) const { return def_.nodes[static_cast<size_t>(i)]; }
  OpKind kind(NodeIndex i) const { return node(i).kind; }
  int dim(NodeIndex i) const { return dims_[static_cast<size_t>(i)]; }
  const std::vector<NodeIndex>& parents(NodeIndex i) const {
    return parents_[static_cast<size_t>(i)];
  }
  const std::vector<NodeIndex>& topo_order() const { return topo_; }
  const std::vector<NodeIndex>& inputs() const { return inputs_; }
  NodeIndex output() const { return output_; }
  /// True when node i is an ancestor of (or equal to) the output.
  bool is_live(NodeIndex i) const { return live_[static_cast<size_t>(i)]; }
  int output_dim() const { return dim(output_); }
  int input_dim() const { return input_dim_; }
  /// Offset of an input node inside the concatenated input vector.
  int input_offset(NodeIndex input) const;
  /// Column block of an Affine node's weight that multiplies parent slot j.
  Eigen::Block<const Matrix> weight_block(NodeIndex i, int parent_slot) const;

  std::optional<NodeIndex> find(std::string_view id) const;
  NodeIndex index_of(std::string_view id) const;  // throws GraphError

 private:
  Graph() = default;

  GraphDef def_;
  std::vector<int> dims_;
  std::vector<std::vector<NodeIndex>> parents_;
  std::vector<std::vector<int>> parent_col_offsets_;
  std::vector<NodeIndex> topo_;
  std::vector<NodeIndex> inputs_;
  std::vector<int> input_offsets_;  // indexed by node, -1 for non-inputs
  std::vector<bool> live_;
  NodeIndex output_ = -1;
  int input_dim_ = 0;
  std::unordered_map<std::string, NodeIndex> index_;
};

/// Exact forward evaluation of the output node at x.
Vector evaluate(const Graph& graph, const Vector& x);
/// Forward evaluation returning every node's value (indexed by node).
std::vector<Vector> evaluate_all(const Graph& graph, const Vector& x);

/// Pointwise primitive map of one node given its parents' values.
Vector apply_op(const Graph& graph, NodeIndex i, const std::vector<const Vector*>& args);

}  // namespace boxcert
