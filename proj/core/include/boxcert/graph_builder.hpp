#pragma once

#include "boxcert/graph.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace boxcert {

/// Incremental graph construction with automatic unique ids and eager shape
/// tracking. Used to compose graph fragments (dynamics, controllers,
/// certificates) into one closed graph.
class GraphBuilder {
 public:
  explicit GraphBuilder(std::string name);

  std::string input(const std::string& id, int dim);
  std::string constant(const Vector& value, const std::string& hint = "const");
  std::string affine(const std::vector<std::string>& parents, const Matrix& weight,
                     const Vector& bias = Vector(), const std::string& hint = "affine");
  std::string add(const std::vector<std::string>& parents, const std::string& hint = "add");
  std::string sub(const std::string& a, const std::string& b, const std::string& hint = "sub");
  std::string neg(const std::string& a, const std::string& hint = "neg");
  std::string mul(const std::string& a, const std::string& b, const std::string& hint = "mul");
  std::string scale(const std::string& a, double factor, const std::string& hint = "scale");
  std::string unary(OpKind kind, const std::string& a, const std::string& hint = "");
  std::string concat(const std::vector<std::string>& parents, const std::string& hint = "concat");
  std::string slice(const std::string& a, int lo, int hi, const std::string& hint = "slice");
  std::string sum(const std::string& a, const std::string& hint = "sum");

  /// a·b as Mul followed by SumReduce.
  std::string dot(const std::string& a, const std::string& b, const std::string& hint = "dot");
  /// a + offset for a constant offset vector (one Affine node).
  std::string shift(const std::string& a, const Vector& offset, const std::string& hint = "shift");

  /// Copies every live node of `fragment` into this graph, binding the
  /// fragment's inputs (declaration order) to `bindings`. Returns the id of
  /// the copied output node.
  std::string inline_graph(const Graph& fragment, const std::vector<std::string>& bindings,
                           const std::string& prefix);
  /// Same as inline_graph but returns the new id of every copied node,
  /// indexed by fragment node (empty for dead nodes).
  std::vector<std::string> inline_nodes(const Graph& fragment, const std::vector<std::string>& bindings,
                                        const std::string& prefix);

  int dim(const std::string& id) const;
  bool has(const std::string& id) const { return dims_.count(id) != 0; }

  GraphDef def(const std::string& output) const;
  Graph build(const std::string& output) const;

 private:
  std::string fresh(const std::string& hint);
  std::string push(Node node, int dim);

  GraphDef def_;
  std::unordered_map<std::string, int> dims_;
  std::unordered_map<std::string, int> counters_;
};

}  // namespace boxcert
