#include "boxcert/graph.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <sstream>

namespace boxcert {

namespace {

struct TagEntry {
  OpKind kind;
  std::string_view tag;
};

constexpr std::array<TagEntry, 18> kTags{{
    {OpKind::Input, "input"},
    {OpKind::Constant, "constant"},
    {OpKind::Affine, "affine"},
    {OpKind::Add, "add"},
    {OpKind::Sub, "sub"},
    {OpKind::Neg, "neg"},
    {OpKind::Mul, "mul"},
    {OpKind::Scale, "scale"},
    {OpKind::ReLU, "relu"},
    {OpKind::Tanh, "tanh"},
    {OpKind::Sigmoid, "sigmoid"},
    {OpKind::Sin, "sin"},
    {OpKind::Cos, "cos"},
    {OpKind::Square, "square"},
    {OpKind::Concat, "concat"},
    {OpKind::Slice, "slice"},
    {OpKind::SumReduce, "sum_reduce"},
    {OpKind::Heaviside, "heaviside"},
}};

// Allowed parent counts; max < 0 means unbounded.
struct Arity {
  int min;
  int max;
};

Arity arity_of(OpKind kind) {
  switch (kind) {
    case OpKind::Input:
    case OpKind::Constant:
      return {0, 0};
    case OpKind::Affine:
    case OpKind::Concat:
      return {1, -1};
    case OpKind::Add:
      return {2, -1};
    case OpKind::Sub:
    case OpKind::Mul:
      return {2, 2};
    default:
      return {1, 1};
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view op_tag(OpKind kind) {
  for (const auto& e : kTags) {
    if (e.kind == kind) return e.tag;
  }
  return "?";
}

std::optional<OpKind> op_from_tag(std::string_view tag) {
  for (const auto& e : kTags) {
    if (e.tag == tag) return e.kind;
  }
  return std::nullopt;
}

bool is_linear_op(OpKind kind) {
  switch (kind) {
    case OpKind::Affine:
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Neg:
    case OpKind::Scale:
    case OpKind::Concat:
    case OpKind::Slice:
    case OpKind::SumReduce:
      return true;
    default:
      return false;
  }
}

bool is_elementwise_op(OpKind kind) {
  switch (kind) {
    case OpKind::ReLU:
    case OpKind::Tanh:
    case OpKind::Sigmoid:
    case OpKind::Sin:
    case OpKind::Cos:
    case OpKind::Square:
    case OpKind::Heaviside:
      return true;
    default:
      return false;
  }
}

ValidationReport validate(const GraphDef& def) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  const int n = static_cast<int>(def.nodes.size());
  std::unordered_map<std::string, NodeIndex> index;
  for (int i = 0; i < n; ++i) {
    const auto& node = def.nodes[static_cast<size_t>(i)];
    if (node.id.empty()) {
      fail("node #" + std::to_string(i) + ": empty id");
      continue;
    }
    if (!index.emplace(node.id, i).second) fail("duplicate node id '" + node.id + "'");
  }

  // Parents, arity.
  std::vector<std::vector<NodeIndex>> parents(static_cast<size_t>(n));
  bool structural_ok = true;
  for (int i = 0; i < n; ++i) {
    const auto& node = def.nodes[static_cast<size_t>(i)];
    const Arity a = arity_of(node.kind);
    const int count = static_cast<int>(node.parents.size());
    if (count < a.min || (a.max >= 0 && count > a.max)) {
      std::ostringstream os;
      os << "arity: node '" << node.id << "' (" << op_tag(node.kind) << ") has " << count
         << " parent(s), expected ";
      if (a.max < 0) os << "at least " << a.min;
      else if (a.min == a.max) os << "exactly " << a.min;
      else os << a.min << ".." << a.max;
      fail(os.str());
      structural_ok = false;
    }
    for (const auto& p : node.parents) {
      auto it = index.find(p);
      if (it == index.end()) {
        fail("dangling parent: node '" + node.id + "' references unknown node '" + p + "'");
        structural_ok = false;
      } else {
        parents[static_cast<size_t>(i)].push_back(it->second);
      }
    }
  }

  // Inputs and output.
  std::vector<bool> declared_input(static_cast<size_t>(n), false);
  if (def.input_ids.empty()) fail("graph declares no inputs");
  for (const auto& id : def.input_ids) {
    auto it = index.find(id);
    if (it == index.end()) {
      fail("input '" + id + "' is not a node");
      structural_ok = false;
      continue;
    }
    const auto& node = def.nodes[static_cast<size_t>(it->second)];
    if (node.kind != OpKind::Input) fail("input '" + id + "' is not an input node");
    if (node.dim <= 0) fail("input '" + id + "' has non-positive dimension");
    if (declared_input[static_cast<size_t>(it->second)]) fail("input '" + id + "' declared twice");
    declared_input[static_cast<size_t>(it->second)] = true;
  }
  for (int i = 0; i < n; ++i) {
    if (def.nodes[static_cast<size_t>(i)].kind == OpKind::Input &&
        !declared_input[static_cast<size_t>(i)]) {
      fail("input node '" + def.nodes[static_cast<size_t>(i)].id + "' missing from the input list");
    }
  }
  if (!index.count(def.output_id)) {
    fail("output '" + def.output_id + "' is not a node");
    structural_ok = false;
  }
  if (!structural_ok) return report;

  // Kahn's algorithm, releasing ready nodes in declaration order.
  std::vector<int> pending(static_cast<size_t>(n), 0);
  std::vector<std::vector<NodeIndex>> children(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (NodeIndex p : parents[static_cast<size_t>(i)]) {
      ++pending[static_cast<size_t>(i)];
      children[static_cast<size_t>(p)].push_back(i);
    }
  }
  std::vector<NodeIndex> order;
  std::vector<bool> released(static_cast<size_t>(n), false);
  std::deque<NodeIndex> ready;
  for (int i = 0; i < n; ++i) {
    if (pending[static_cast<size_t>(i)] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    NodeIndex i = ready.front();
    ready.pop_front();
    order.push_back(i);
    released[static_cast<size_t>(i)] = true;
    for (NodeIndex c : children[static_cast<size_t>(i)]) {
      if (--pending[static_cast<size_t>(c)] == 0) ready.push_back(c);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    std::string names;
    for (int i = 0; i < n; ++i) {
      if (!released[static_cast<size_t>(i)]) {
        if (!names.empty()) names += ", ";
        names += def.nodes[static_cast<size_t>(i)].id;
      }
    }
    fail("cycle: nodes on or behind a cycle: " + names);
    return report;
  }

  // Shape inference in topological order.
  std::vector<int> dims(static_cast<size_t>(n), 0);
  for (NodeIndex i : order) {
    const auto& node = def.nodes[static_cast<size_t>(i)];
    const auto& ps = parents[static_cast<size_t>(i)];
    auto pdim = [&](size_t k) { return dims[static_cast<size_t>(ps[k])]; };
    auto where = [&] { return "shape: node '" + node.id + "' (" + std::string(op_tag(node.kind)) + "): "; };
    int d = 0;
    switch (node.kind) {
      case OpKind::Input:
        d = node.dim;
        break;
      case OpKind::Constant:
        d = static_cast<int>(node.value.size());
        if (d == 0) fail(where() + "empty constant");
        break;
      case OpKind::Affine: {
        int cols = 0;
        for (size_t k = 0; k < ps.size(); ++k) cols += pdim(k);
        if (node.weight.cols() != cols) {
          fail(where() + "weight has " + std::to_string(node.weight.cols()) +
               " columns, parents total " + std::to_string(cols));
        }
        d = static_cast<int>(node.weight.rows());
        if (d == 0) fail(where() + "weight has no rows");
        if (node.bias.size() != 0 && node.bias.size() != d) {
          fail(where() + "bias length " + std::to_string(node.bias.size()) +
               " does not match " + std::to_string(d) + " rows");
        }
        break;
      }
      case OpKind::Add:
      case OpKind::Sub:
      case OpKind::Mul:
        d = pdim(0);
        for (size_t k = 1; k < ps.size(); ++k) {
          if (pdim(k) != d) fail(where() + "parents have mismatched dimensions");
        }
        break;
      case OpKind::Concat:
        for (size_t k = 0; k < ps.size(); ++k) d += pdim(k);
        break;
      case OpKind::Slice:
        if (node.lo < 0 || node.hi > pdim(0) || node.lo >= node.hi) {
          fail(where() + "range [" + std::to_string(node.lo) + ", " + std::to_string(node.hi) +
               ") outside parent dimension " + std::to_string(pdim(0)));
        }
        d = node.hi - node.lo;
        break;
      case OpKind::SumReduce:
        d = 1;
        break;
      case OpKind::Scale:
        if (!std::isfinite(node.factor)) fail(where() + "non-finite factor");
        d = pdim(0);
        break;
      default:
        d = pdim(0);
        break;
    }
    if (node.kind != OpKind::Input && node.dim != 0 && node.dim != d) {
      fail(where() + "declared dimension " + std::to_string(node.dim) + " but inferred " +
           std::to_string(d));
    }
    dims[static_cast<size_t>(i)] = d;
  }

  if (report.violations.empty()) {
    report.ok = true;
    report.topo_order = std::move(order);
    report.dims = std::move(dims);
  }
  return report;
}

Graph Graph::compile(GraphDef def) {
  ValidationReport report = validate(def);
  if (!report) {
    std::string msg = "invalid graph '" + def.name + "':";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw GraphError(msg);
  }
  Graph g;
  g.def_ = std::move(def);
  const int n = static_cast<int>(g.def_.nodes.size());
  g.dims_ = std::move(report.dims);
  g.topo_ = std::move(report.topo_order);
  for (int i = 0; i < n; ++i) g.index_.emplace(g.def_.nodes[static_cast<size_t>(i)].id, i);
  g.parents_.resize(static_cast<size_t>(n));
  g.parent_col_offsets_.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int off = 0;
    for (const auto& p : g.def_.nodes[static_cast<size_t>(i)].parents) {
      NodeIndex pi = g.index_.at(p);
      g.parents_[static_cast<size_t>(i)].push_back(pi);
      g.parent_col_offsets_[static_cast<size_t>(i)].push_back(off);
      off += g.dims_[static_cast<size_t>(pi)];
    }
  }
  g.input_offsets_.assign(static_cast<size_t>(n), -1);
  for (const auto& id : g.def_.input_ids) {
    NodeIndex i = g.index_.at(id);
    g.inputs_.push_back(i);
    g.input_offsets_[static_cast<size_t>(i)] = g.input_dim_;
    g.input_dim_ += g.dims_[static_cast<size_t>(i)];
  }
  g.output_ = g.index_.at(g.def_.output_id);
  g.live_.assign(static_cast<size_t>(n), false);
  g.live_[static_cast<size_t>(g.output_)] = true;
  for (auto it = g.topo_.rbegin(); it != g.topo_.rend(); ++it) {
    if (!g.live_[static_cast<size_t>(*it)]) continue;
    for (NodeIndex p : g.parents_[static_cast<size_t>(*it)]) g.live_[static_cast<size_t>(p)] = true;
  }
  // Non-input nodes carry their inferred dimension.
  for (int i = 0; i < n; ++i) g.def_.nodes[static_cast<size_t>(i)].dim = g.dims_[static_cast<size_t>(i)];
  return g;
}

int Graph::input_offset(NodeIndex input) const {
  const int off = input_offsets_[static_cast<size_t>(input)];
  if (off < 0) throw GraphError("node '" + node(input).id + "' is not an input");
  return off;
}

Eigen::Block<const Matrix> Graph::weight_block(NodeIndex i, int parent_slot) const {
  const auto& w = node(i).weight;
  const int off = parent_col_offsets_[static_cast<size_t>(i)][static_cast<size_t>(parent_slot)];
  const int cols = dim(parents(i)[static_cast<size_t>(parent_slot)]);
  return w.block(0, off, w.rows(), cols);
}

std::optional<NodeIndex> Graph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Graph::index_of(std::string_view id) const {
  auto i = find(id);
  if (!i) throw GraphError("graph '" + name() + "' has no node '" + std::string(id) + "'");
  return *i;
}

Vector apply_op(const Graph& graph, NodeIndex i, const std::vector<const Vector*>& args) {
  const Node& node = graph.node(i);
  switch (node.kind) {
    case OpKind::Input:
      throw GraphError("apply_op called on input node '" + node.id + "'");
    case OpKind::Constant:
      return node.value;
    case OpKind::Affine: {
      Vector out = node.bias.size() ? node.bias : Vector::Zero(graph.dim(i));
      for (size_t k = 0; k < args.size(); ++k) {
        out.noalias() += graph.weight_block(i, static_cast<int>(k)) * *args[k];
      }
      return out;
    }
    case OpKind::Add: {
      Vector out = *args[0];
      for (size_t k = 1; k < args.size(); ++k) out += *args[k];
      return out;
    }
    case OpKind::Sub:
      return *args[0] - *args[1];
    case OpKind::Neg:
      return -*args[0];
    case OpKind::Mul:
      return args[0]->cwiseProduct(*args[1]);
    case OpKind::Scale:
      return node.factor * *args[0];
    case OpKind::ReLU:
      return args[0]->cwiseMax(0.0);
    case OpKind::Tanh:
      return args[0]->array().tanh().matrix();
    case OpKind::Sigmoid:
      return args[0]->unaryExpr([](double v) { return sigmoid(v); });
    case OpKind::Sin:
      return args[0]->array().sin().matrix();
    case OpKind::Cos:
      return args[0]->array().cos().matrix();
    case OpKind::Square:
      return args[0]->array().square().matrix();
    case OpKind::Concat: {
      Vector out(graph.dim(i));
      Eigen::Index off = 0;
      for (const Vector* a : args) {
        out.segment(off, a->size()) = *a;
        off += a->size();
      }
      return out;
    }
    case OpKind::Slice:
      return args[0]->segment(node.lo, node.hi - node.lo);
    case OpKind::SumReduce:
      return Vector::Constant(1, args[0]->sum());
    case OpKind::Heaviside:
      return args[0]->unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
  }
  throw GraphError("unhandled operator");
}

std::vector<Vector> evaluate_all(const Graph& graph, const Vector& x) {
  if (x.size() != graph.input_dim()) {
    throw GraphError("evaluate: point has dimension " + std::to_string(x.size()) +
                     ", graph expects " + std::to_string(graph.input_dim()));
  }
  std::vector<Vector> values(static_cast<size_t>(graph.size()));
  std::vector<const Vector*> args;
  for (NodeIndex i : graph.topo_order()) {
    if (!graph.is_live(i)) continue;
    if (graph.kind(i) == OpKind::Input) {
      values[static_cast<size_t>(i)] = x.segment(graph.input_offset(i), graph.dim(i));
      continue;
    }
    args.clear();
    for (NodeIndex p : graph.parents(i)) args.push_back(&values[static_cast<size_t>(p)]);
    values[static_cast<size_t>(i)] = apply_op(graph, i, args);
  }
  return values;
}

Vector evaluate(const Graph& graph, const Vector& x) {
  return evaluate_all(graph, x)[static_cast<size_t>(graph.output())];
}

}  // namespace boxcert
