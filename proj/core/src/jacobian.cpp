#include "boxcert/jacobian.hpp"

#include "boxcert/graph_builder.hpp"

#include <cmath>

namespace boxcert {

namespace {

[[noreturn]] void no_rule(const Graph& graph, NodeIndex i) {
  throw GraphError("no derivative rule for operator '" + std::string(op_tag(graph.kind(i))) +
                   "' (node '" + graph.node(i).id + "')");
}

}  // namespace

AugmentedGraph augment_with_jacobian(const Graph& graph) {
  if (graph.output_dim() != 1) {
    throw GraphError("jacobian augmentation needs a scalar output, '" + graph.node(graph.output()).id +
                     "' has dimension " + std::to_string(graph.output_dim()));
  }
  GraphBuilder b(graph.name() + ".jac");
  std::vector<std::string> in_ids;
  for (NodeIndex i : graph.inputs()) in_ids.push_back(b.input(graph.node(i).id, graph.dim(i)));
  const std::vector<std::string> fwd = b.inline_nodes(graph, in_ids, "f");
  auto f = [&](NodeIndex i) { return fwd[static_cast<size_t>(i)]; };

  std::vector<std::vector<std::string>> contrib(static_cast<size_t>(graph.size()));
  auto push = [&](NodeIndex i, const std::string& id) { contrib[static_cast<size_t>(i)].push_back(id); };
  push(graph.output(), b.constant(Vector::Ones(1), "seed"));

  const auto& topo = graph.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const NodeIndex i = *it;
    auto& parts = contrib[static_cast<size_t>(i)];
    if (parts.empty()) continue;
    const OpKind kind = graph.kind(i);
    if (kind == OpKind::Input || kind == OpKind::Constant) continue;

    const std::string g = b.add(parts, "adj");
    parts = {g};
    const auto& ps = graph.parents(i);
    const int d = graph.dim(i);
    switch (kind) {
      case OpKind::Affine:
        for (size_t k = 0; k < ps.size(); ++k) {
          push(ps[k], b.affine({g}, graph.weight_block(i, static_cast<int>(k)).transpose(), Vector(),
                               "adj_affine"));
        }
        break;
      case OpKind::Add:
        for (NodeIndex p : ps) push(p, g);
        break;
      case OpKind::Sub:
        push(ps[0], g);
        push(ps[1], b.neg(g, "adj_neg"));
        break;
      case OpKind::Neg:
        push(ps[0], b.neg(g, "adj_neg"));
        break;
      case OpKind::Scale:
        push(ps[0], b.scale(g, graph.node(i).factor, "adj_scale"));
        break;
      case OpKind::Concat: {
        int off = 0;
        for (NodeIndex p : ps) {
          push(p, b.slice(g, off, off + graph.dim(p), "adj_slice"));
          off += graph.dim(p);
        }
        break;
      }
      case OpKind::Slice: {
        const int pd = graph.dim(ps[0]);
        Matrix e = Matrix::Zero(pd, d);
        e.block(graph.node(i).lo, 0, d, d).setIdentity();
        push(ps[0], b.affine({g}, e, Vector(), "adj_embed"));
        break;
      }
      case OpKind::SumReduce:
        push(ps[0], b.affine({g}, Matrix::Ones(graph.dim(ps[0]), 1), Vector(), "adj_bcast"));
        break;
      case OpKind::ReLU:
        push(ps[0], b.mul(g, b.unary(OpKind::Heaviside, f(ps[0]), "gate"), "adj_relu"));
        break;
      case OpKind::Tanh: {
        const std::string t2 = b.unary(OpKind::Square, f(i), "tanh_sq");
        const std::string dt = b.affine({t2}, -Matrix::Identity(d, d), Vector::Ones(d), "dtanh");
        push(ps[0], b.mul(g, dt, "adj_tanh"));
        break;
      }
      case OpKind::Sigmoid: {
        const std::string one_minus = b.affine({f(i)}, -Matrix::Identity(d, d), Vector::Ones(d), "sig_c");
        const std::string ds = b.mul(f(i), one_minus, "dsig");
        push(ps[0], b.mul(g, ds, "adj_sigmoid"));
        break;
      }
      case OpKind::Sin:
        push(ps[0], b.mul(g, b.unary(OpKind::Cos, f(ps[0]), "dsin"), "adj_sin"));
        break;
      case OpKind::Cos: {
        const std::string s = b.unary(OpKind::Sin, f(ps[0]), "dcos_s");
        push(ps[0], b.mul(g, b.neg(s, "dcos"), "adj_cos"));
        break;
      }
      case OpKind::Square:
        push(ps[0], b.mul(g, b.scale(f(ps[0]), 2.0, "dsq"), "adj_sq"));
        break;
      case OpKind::Mul:
        push(ps[0], b.mul(g, f(ps[1]), "adj_mul"));
        push(ps[1], b.mul(g, f(ps[0]), "adj_mul"));
        break;
      default:
        no_rule(graph, i);
    }
  }

  std::vector<std::string> parts{f(graph.output())};
  for (NodeIndex in : graph.inputs()) {
    const auto& c = contrib[static_cast<size_t>(in)];
    parts.push_back(c.empty() ? b.constant(Vector::Zero(graph.dim(in)), "zero_grad")
                              : b.add(c, "grad_" + graph.node(in).id));
  }
  const std::string out = b.concat(parts, "value_and_grad");
  return {b.build(out), {0, 1}, {1, 1 + graph.input_dim()}};
}

Vector point_gradient(const Graph& graph, const Vector& x, const Vector& cotangent) {
  Vector seed = cotangent;
  if (seed.size() == 0) {
    if (graph.output_dim() != 1) throw GraphError("point_gradient: vector output needs a cotangent");
    seed = Vector::Ones(1);
  }
  if (seed.size() != graph.output_dim()) throw GraphError("point_gradient: cotangent dimension mismatch");

  const std::vector<Vector> val = evaluate_all(graph, x);
  auto v = [&](NodeIndex i) -> const Vector& { return val[static_cast<size_t>(i)]; };
  std::vector<Vector> adj(static_cast<size_t>(graph.size()));
  auto add_to = [&](NodeIndex i, const Vector& g) {
    Vector& slot = adj[static_cast<size_t>(i)];
    if (slot.size() == 0) slot = g;
    else slot += g;
  };
  add_to(graph.output(), seed);

  Vector grad = Vector::Zero(graph.input_dim());
  const auto& topo = graph.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const NodeIndex i = *it;
    const Vector& g = adj[static_cast<size_t>(i)];
    if (g.size() == 0) continue;
    const auto& ps = graph.parents(i);
    switch (graph.kind(i)) {
      case OpKind::Input:
        grad.segment(graph.input_offset(i), graph.dim(i)) += g;
        break;
      case OpKind::Constant:
        break;
      case OpKind::Affine:
        for (size_t k = 0; k < ps.size(); ++k) {
          add_to(ps[k], graph.weight_block(i, static_cast<int>(k)).transpose() * g);
        }
        break;
      case OpKind::Add:
        for (NodeIndex p : ps) add_to(p, g);
        break;
      case OpKind::Sub:
        add_to(ps[0], g);
        add_to(ps[1], -g);
        break;
      case OpKind::Neg:
        add_to(ps[0], -g);
        break;
      case OpKind::Scale:
        add_to(ps[0], graph.node(i).factor * g);
        break;
      case OpKind::Concat: {
        int off = 0;
        for (NodeIndex p : ps) {
          add_to(p, g.segment(off, graph.dim(p)));
          off += graph.dim(p);
        }
        break;
      }
      case OpKind::Slice: {
        Vector e = Vector::Zero(graph.dim(ps[0]));
        e.segment(graph.node(i).lo, graph.dim(i)) = g;
        add_to(ps[0], e);
        break;
      }
      case OpKind::SumReduce:
        add_to(ps[0], Vector::Constant(graph.dim(ps[0]), g[0]));
        break;
      case OpKind::ReLU:
        add_to(ps[0], g.cwiseProduct((v(ps[0]).array() > 0.0).cast<double>().matrix()));
        break;
      case OpKind::Heaviside:
        add_to(ps[0], Vector::Zero(graph.dim(i)));
        break;
      case OpKind::Tanh:
        add_to(ps[0], g.cwiseProduct((1.0 - v(i).array().square()).matrix()));
        break;
      case OpKind::Sigmoid:
        add_to(ps[0], g.cwiseProduct((v(i).array() * (1.0 - v(i).array())).matrix()));
        break;
      case OpKind::Sin:
        add_to(ps[0], g.cwiseProduct(v(ps[0]).array().cos().matrix()));
        break;
      case OpKind::Cos:
        add_to(ps[0], -g.cwiseProduct(v(ps[0]).array().sin().matrix()));
        break;
      case OpKind::Square:
        add_to(ps[0], 2.0 * g.cwiseProduct(v(ps[0])));
        break;
      case OpKind::Mul:
        add_to(ps[0], g.cwiseProduct(v(ps[1])));
        add_to(ps[1], g.cwiseProduct(v(ps[0])));
        break;
    }
  }
  return grad;
}

}  // namespace boxcert
