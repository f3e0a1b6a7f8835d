#include "boxcert/graph_builder.hpp"

namespace boxcert {

GraphBuilder::GraphBuilder(std::string name) { def_.name = std::move(name); }

std::string GraphBuilder::fresh(const std::string& hint) {
  const std::string base = hint.empty() ? "n" : hint;
  if (!dims_.count(base) && !counters_.count(base)) {
    counters_[base] = 0;
    return base;
  }
  int& c = counters_[base];
  std::string id;
  do {
    id = base + "_" + std::to_string(++c);
  } while (dims_.count(id));
  return id;
}

std::string GraphBuilder::push(Node node, int dim) {
  for (const auto& p : node.parents) {
    if (!dims_.count(p)) throw GraphError("builder: unknown parent '" + p + "'");
  }
  dims_[node.id] = dim;
  std::string id = node.id;
  def_.nodes.push_back(std::move(node));
  return id;
}

int GraphBuilder::dim(const std::string& id) const {
  auto it = dims_.find(id);
  if (it == dims_.end()) throw GraphError("builder: unknown node '" + id + "'");
  return it->second;
}

std::string GraphBuilder::input(const std::string& id, int d) {
  if (dims_.count(id)) throw GraphError("builder: duplicate id '" + id + "'");
  Node n;
  n.id = id;
  n.kind = OpKind::Input;
  n.dim = d;
  counters_.emplace(id, 0);
  def_.input_ids.push_back(id);
  return push(std::move(n), d);
}

std::string GraphBuilder::constant(const Vector& value, const std::string& hint) {
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Constant;
  n.value = value;
  return push(std::move(n), static_cast<int>(value.size()));
}

std::string GraphBuilder::affine(const std::vector<std::string>& parents, const Matrix& weight,
                                 const Vector& bias, const std::string& hint) {
  int cols = 0;
  for (const auto& p : parents) cols += dim(p);
  if (weight.cols() != cols) throw GraphError("builder: affine weight/parent dimension mismatch");
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Affine;
  n.parents = parents;
  n.weight = weight;
  n.bias = bias;
  return push(std::move(n), static_cast<int>(weight.rows()));
}

std::string GraphBuilder::add(const std::vector<std::string>& parents, const std::string& hint) {
  if (parents.size() == 1) return parents.front();
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Add;
  n.parents = parents;
  return push(std::move(n), dim(parents.front()));
}

std::string GraphBuilder::sub(const std::string& a, const std::string& b, const std::string& hint) {
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Sub;
  n.parents = {a, b};
  return push(std::move(n), dim(a));
}

std::string GraphBuilder::neg(const std::string& a, const std::string& hint) {
  return unary(OpKind::Neg, a, hint);
}

std::string GraphBuilder::mul(const std::string& a, const std::string& b, const std::string& hint) {
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Mul;
  n.parents = {a, b};
  return push(std::move(n), dim(a));
}

std::string GraphBuilder::scale(const std::string& a, double factor, const std::string& hint) {
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Scale;
  n.parents = {a};
  n.factor = factor;
  return push(std::move(n), dim(a));
}

std::string GraphBuilder::unary(OpKind kind, const std::string& a, const std::string& hint) {
  Node n;
  n.id = fresh(hint.empty() ? std::string(op_tag(kind)) : hint);
  n.kind = kind;
  n.parents = {a};
  const int d = kind == OpKind::SumReduce ? 1 : dim(a);
  return push(std::move(n), d);
}

std::string GraphBuilder::concat(const std::vector<std::string>& parents, const std::string& hint) {
  if (parents.size() == 1) return parents.front();
  int d = 0;
  for (const auto& p : parents) d += dim(p);
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Concat;
  n.parents = parents;
  return push(std::move(n), d);
}

std::string GraphBuilder::slice(const std::string& a, int lo, int hi, const std::string& hint) {
  if (lo == 0 && hi == dim(a)) return a;
  Node n;
  n.id = fresh(hint);
  n.kind = OpKind::Slice;
  n.parents = {a};
  n.lo = lo;
  n.hi = hi;
  return push(std::move(n), hi - lo);
}

std::string GraphBuilder::sum(const std::string& a, const std::string& hint) {
  return unary(OpKind::SumReduce, a, hint);
}

std::string GraphBuilder::dot(const std::string& a, const std::string& b, const std::string& hint) {
  return sum(mul(a, b, hint + "_prod"), hint);
}

std::string GraphBuilder::shift(const std::string& a, const Vector& offset, const std::string& hint) {
  const int d = dim(a);
  return affine({a}, Matrix::Identity(d, d), offset, hint);
}

std::vector<std::string> GraphBuilder::inline_nodes(const Graph& fragment,
                                                   const std::vector<std::string>& bindings,
                                                   const std::string& prefix) {
  if (bindings.size() != fragment.inputs().size()) {
    throw GraphError("builder: fragment '" + fragment.name() + "' has " +
                     std::to_string(fragment.inputs().size()) + " input(s), got " +
                     std::to_string(bindings.size()) + " binding(s)");
  }
  std::vector<std::string> mapped(static_cast<size_t>(fragment.size()));
  for (size_t k = 0; k < bindings.size(); ++k) {
    const NodeIndex in = fragment.inputs()[k];
    if (dim(bindings[k]) != fragment.dim(in)) {
      throw GraphError("builder: binding '" + bindings[k] + "' has dimension " +
                       std::to_string(dim(bindings[k])) + " but fragment input '" +
                       fragment.node(in).id + "' expects " + std::to_string(fragment.dim(in)));
    }
    mapped[static_cast<size_t>(in)] = bindings[k];
  }
  for (NodeIndex i : fragment.topo_order()) {
    if (!fragment.is_live(i) || fragment.kind(i) == OpKind::Input) continue;
    Node n = fragment.node(i);
    n.id = fresh(prefix + "." + n.id);
    for (size_t k = 0; k < n.parents.size(); ++k) {
      n.parents[k] = mapped[static_cast<size_t>(fragment.parents(i)[k])];
    }
    mapped[static_cast<size_t>(i)] = push(std::move(n), fragment.dim(i));
  }
  return mapped;
}

std::string GraphBuilder::inline_graph(const Graph& fragment, const std::vector<std::string>& bindings,
                                       const std::string& prefix) {
  return inline_nodes(fragment, bindings, prefix)[static_cast<size_t>(fragment.output())];
}

GraphDef GraphBuilder::def(const std::string& output) const {
  GraphDef d = def_;
  d.output_id = output;
  return d;
}

Graph GraphBuilder::build(const std::string& output) const { return Graph::compile(def(output)); }

}  // namespace boxcert
