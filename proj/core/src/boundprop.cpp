#include "boxcert/boundprop.hpp"

namespace boxcert {

const IntervalVector& PreactivationCache::at(const Graph& graph, NodeIndex i) const {
  if (!has(i)) {
    throw GraphError("preactivation cache has no bounds for node '" + graph.node(i).id + "'");
  }
  return *entries_[static_cast<size_t>(i)];
}

ScalarBounds concretize(const AffineBound& bound) {
  const Vector& l = bound.box.lower;
  const Vector& u = bound.box.upper;
  const Matrix lp = bound.A_l.cwiseMax(0.0), ln = bound.A_l.cwiseMin(0.0);
  const Matrix up = bound.A_u.cwiseMax(0.0), un = bound.A_u.cwiseMin(0.0);
  return {lp * l + ln * u + bound.b_l, up * u + un * l + bound.b_u};
}

namespace {

std::vector<bool> ancestors(const Graph& graph, NodeIndex target) {
  std::vector<bool> seen(static_cast<size_t>(graph.size()), false);
  std::vector<NodeIndex> stack{target};
  seen[static_cast<size_t>(target)] = true;
  while (!stack.empty()) {
    const NodeIndex i = stack.back();
    stack.pop_back();
    for (NodeIndex p : graph.parents(i)) {
      if (!seen[static_cast<size_t>(p)]) {
        seen[static_cast<size_t>(p)] = true;
        stack.push_back(p);
      }
    }
  }
  return seen;
}

void accumulate(std::vector<Matrix>& acc, NodeIndex i, Matrix m) {
  Matrix& slot = acc[static_cast<size_t>(i)];
  if (slot.size() == 0) slot = std::move(m);
  else slot += m;
}

}  // namespace

AffineBound backward_bounds(const Graph& graph, const Box& box, NodeIndex target,
                            const PreactivationCache& cache, const RelaxParams& params,
                            const Matrix* objective) {
  const Matrix init = objective ? *objective : Matrix::Identity(graph.dim(target), graph.dim(target));
  if (init.cols() != graph.dim(target)) {
    throw GraphError("objective has " + std::to_string(init.cols()) + " columns, node '" +
                     graph.node(target).id + "' has dimension " + std::to_string(graph.dim(target)));
  }
  const Eigen::Index rows = init.rows();

  AffineBound out;
  out.box = box;
  out.A_l = Matrix::Zero(rows, graph.input_dim());
  out.A_u = Matrix::Zero(rows, graph.input_dim());
  out.b_l = Vector::Zero(rows);
  out.b_u = Vector::Zero(rows);

  std::vector<Matrix> hat_l(static_cast<size_t>(graph.size()));
  std::vector<Matrix> hat_u(static_cast<size_t>(graph.size()));
  hat_l[static_cast<size_t>(target)] = init;
  hat_u[static_cast<size_t>(target)] = init;

  // Reverse topological order visits a node only after every child has
  // pushed its contribution.
  const std::vector<bool> anc = ancestors(graph, target);
  const auto& topo = graph.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const NodeIndex j = *it;
    if (!anc[static_cast<size_t>(j)]) continue;
    Matrix& al = hat_l[static_cast<size_t>(j)];
    Matrix& au = hat_u[static_cast<size_t>(j)];
    if (al.size() == 0) continue;  // unreachable from the target with nonzero weight

    const OpKind kind = graph.kind(j);
    if (kind == OpKind::Input) {
      const int off = graph.input_offset(j);
      out.A_l.middleCols(off, graph.dim(j)) += al;
      out.A_u.middleCols(off, graph.dim(j)) += au;
      continue;
    }
    if (kind == OpKind::Constant) {
      out.b_l += al * graph.node(j).value;
      out.b_u += au * graph.node(j).value;
      continue;
    }

    const auto& ps = graph.parents(j);
    PreBox pre;
    if (!is_linear_op(kind)) {
      for (NodeIndex p : ps) pre.push_back(cache.at(graph, p));
    }
    const LinearRelaxation rel = relax_node(graph, j, pre, params);

    if (rel.exact) {
      for (size_t k = 0; k < ps.size(); ++k) {
        accumulate(hat_l, ps[k], rel.lower[k].left_multiply(al));
        accumulate(hat_u, ps[k], rel.upper[k].left_multiply(au));
      }
      out.b_l += al * rel.lower_bias;
      out.b_u += au * rel.upper_bias;
    } else {
      const Matrix alp = al.cwiseMax(0.0), aln = al.cwiseMin(0.0);
      const Matrix aup = au.cwiseMax(0.0), aun = au.cwiseMin(0.0);
      for (size_t k = 0; k < ps.size(); ++k) {
        accumulate(hat_l, ps[k], rel.lower[k].left_multiply(alp) + rel.upper[k].left_multiply(aln));
        accumulate(hat_u, ps[k], rel.upper[k].left_multiply(aup) + rel.lower[k].left_multiply(aun));
      }
      out.b_l += alp * rel.lower_bias + aln * rel.upper_bias;
      out.b_u += aup * rel.upper_bias + aun * rel.lower_bias;
    }
    al.resize(0, 0);
    au.resize(0, 0);
  }
  return out;
}

namespace {

// IBP is exact for a linear node whose parents are distinct inputs or
// constants, so a backward pass cannot improve on it.
bool interval_is_exact(const Graph& graph, NodeIndex i) {
  if (!is_linear_op(graph.kind(i))) return false;
  const auto& ps = graph.parents(i);
  for (size_t a = 0; a < ps.size(); ++a) {
    const OpKind k = graph.kind(ps[a]);
    if (k != OpKind::Input && k != OpKind::Constant) return false;
    for (size_t b = a + 1; b < ps.size(); ++b) {
      if (ps[a] == ps[b]) return false;
    }
  }
  return true;
}

}  // namespace

PreactivationCache compute_preactivations(const Graph& graph, const Box& box,
                                          const RelaxParams& params, BoundMode mode) {
  check_box(box, graph);
  PreactivationCache cache(graph.size());

  std::vector<bool> feeds_nonlinear(static_cast<size_t>(graph.size()), false);
  for (NodeIndex i : graph.topo_order()) {
    if (is_linear_op(graph.kind(i))) continue;
    for (NodeIndex p : graph.parents(i)) feeds_nonlinear[static_cast<size_t>(p)] = true;
  }

  for (NodeIndex i : graph.topo_order()) {
    if (!graph.is_live(i)) continue;
    const OpKind kind = graph.kind(i);
    if (kind == OpKind::Input) {
      const int off = graph.input_offset(i);
      cache.set(i, {box.lower.segment(off, graph.dim(i)), box.upper.segment(off, graph.dim(i))});
      continue;
    }
    if (kind == OpKind::Constant) {
      cache.set(i, IntervalVector::point(graph.node(i).value));
      continue;
    }
    std::vector<const IntervalVector*> ps;
    for (NodeIndex p : graph.parents(i)) ps.push_back(&cache.at(graph, p));
    IntervalVector iv = interval_op(graph, i, ps);
    if (mode == BoundMode::CROWN && feeds_nonlinear[static_cast<size_t>(i)] &&
        !interval_is_exact(graph, i)) {
      iv = iv.intersect(concretize(backward_bounds(graph, box, i, cache, params)));
    }
    cache.set(i, std::move(iv));
  }
  return cache;
}

namespace {

ScalarBounds interval_of_objective(const IntervalVector& y, const Matrix* objective) {
  if (!objective) return y;
  const Matrix& c = *objective;
  const Matrix cp = c.cwiseMax(0.0), cn = c.cwiseMin(0.0);
  return {cp * y.lower + cn * y.upper, cp * y.upper + cn * y.lower};
}

}  // namespace

OutputBounds output_bounds(const Graph& graph, const Box& box, const RelaxParams& params,
                           BoundMode mode, const Matrix* objective) {
  const PreactivationCache cache = compute_preactivations(graph, box, params, mode);
  OutputBounds out;
  out.affine = backward_bounds(graph, box, graph.output(), cache, params, objective);
  const ScalarBounds ibp = interval_of_objective(cache.at(graph, graph.output()), objective);
  if (mode == BoundMode::IBP) {
    out.bounds = ibp;
  } else {
    out.bounds = concretize(out.affine).intersect(ibp);
  }
  return out;
}

std::vector<OutputBounds> output_bounds_batch(const Graph& graph, const std::vector<Box>& boxes,
                                              const RelaxParams& params, BoundMode mode,
                                              const std::vector<Matrix>& objectives, int workers) {
  std::vector<OutputBounds> out(boxes.size());
  parallel_for(static_cast<int>(boxes.size()), workers, [&](int i) {
    const auto k = static_cast<size_t>(i);
    const Matrix* obj = objectives.empty() ? nullptr : &objectives[k];
    out[k] = output_bounds(graph, boxes[k], params, mode, obj);
  });
  return out;
}

}  // namespace boxcert
