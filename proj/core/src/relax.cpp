#include "boxcert/relax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace boxcert {

CoeffBlock CoeffBlock::dense(Matrix m) {
  CoeffBlock b;
  b.dense_ = std::move(m);
  return b;
}

CoeffBlock CoeffBlock::diagonal(Vector d) {
  CoeffBlock b;
  b.diagonal_ = true;
  b.diag_ = std::move(d);
  return b;
}

int CoeffBlock::rows() const {
  return static_cast<int>(diagonal_ ? diag_.size() : dense_.rows());
}

int CoeffBlock::cols() const {
  return static_cast<int>(diagonal_ ? diag_.size() : dense_.cols());
}

Matrix CoeffBlock::to_dense() const {
  if (diagonal_) return diag_.asDiagonal();
  return dense_;
}

Matrix CoeffBlock::left_multiply(const Matrix& coeffs) const {
  if (diagonal_) return coeffs * diag_.asDiagonal();
  return coeffs * dense_;
}

Vector CoeffBlock::apply(const Vector& x) const {
  if (diagonal_) return diag_.cwiseProduct(x);
  return dense_ * x;
}

Vector LinearRelaxation::lower_at(const std::vector<Vector>& xs) const {
  Vector out = lower_bias;
  for (size_t j = 0; j < lower.size(); ++j) out += lower[j].apply(xs[j]);
  return out;
}

Vector LinearRelaxation::upper_at(const std::vector<Vector>& xs) const {
  Vector out = upper_bias;
  for (size_t j = 0; j < upper.size(); ++j) out += upper[j].apply(xs[j]);
  return out;
}

double default_relu_alpha(double l, double u) { return u > -l ? 1.0 : 0.0; }

namespace {

LinearRelaxation from_scalar(const IntervalVector& pre, ScalarRelaxation (*rule)(double, double)) {
  const int d = pre.dim();
  Vector ls(d), lb(d), us(d), ub(d);
  for (int k = 0; k < d; ++k) {
    const ScalarRelaxation r = rule(pre.lower[k], pre.upper[k]);
    ls[k] = r.lower.slope;
    lb[k] = r.lower.bias;
    us[k] = r.upper.slope;
    ub[k] = r.upper.bias;
  }
  LinearRelaxation out;
  out.lower.push_back(CoeffBlock::diagonal(ls));
  out.upper.push_back(CoeffBlock::diagonal(us));
  out.lower_bias = lb;
  out.upper_bias = ub;
  return out;
}

ScalarRelaxation cos_rule(double l, double u) {
  // cos x = sin(x + pi/2)
  constexpr double h = std::numbers::pi / 2;
  if (!(u > l)) {
    const double v = std::cos(l);
    return {{0.0, v}, {0.0, v}};
  }
  ScalarRelaxation r = relax_sin_scalar(l + h, u + h);
  r.lower.bias += r.lower.slope * h;
  r.upper.bias += r.upper.slope * h;
  // The shifted lines are re-padded to absorb the rounding of the shift.
  r.lower.bias -= kRelaxPad;
  r.upper.bias += kRelaxPad;
  return r;
}

ScalarRelaxation square_rule(double l, double u) {
  const double m = 0.5 * (l + u);
  // tangent at the midpoint below, chord above
  return {{2.0 * m, -m * m}, {l + u, -l * u}};
}

}  // namespace

LinearRelaxation relax_relu(const IntervalVector& pre, const Vector* alpha) {
  const int d = pre.dim();
  Vector ls = Vector::Zero(d), lb = Vector::Zero(d), us = Vector::Zero(d), ub = Vector::Zero(d);
  for (int k = 0; k < d; ++k) {
    const double l = pre.lower[k], u = pre.upper[k];
    if (u <= 0.0) continue;
    if (l >= 0.0) {
      ls[k] = us[k] = 1.0;
      continue;
    }
    ls[k] = alpha ? std::clamp((*alpha)[k], 0.0, 1.0) : default_relu_alpha(l, u);
    us[k] = u / (u - l);
    ub[k] = -u * l / (u - l);
  }
  LinearRelaxation out;
  out.lower.push_back(CoeffBlock::diagonal(ls));
  out.upper.push_back(CoeffBlock::diagonal(us));
  out.lower_bias = lb;
  out.upper_bias = ub;
  return out;
}

LinearRelaxation relax_sin(const IntervalVector& pre) { return from_scalar(pre, relax_sin_scalar); }

LinearRelaxation relax_cos(const IntervalVector& pre) { return from_scalar(pre, cos_rule); }

LinearRelaxation relax_sshape(OpKind kind, const IntervalVector& pre) {
  switch (kind) {
    case OpKind::Tanh:
      return from_scalar(pre, relax_tanh_scalar);
    case OpKind::Sigmoid:
      return from_scalar(pre, relax_sigmoid_scalar);
    default:
      throw GraphError("relax_sshape: expected tanh or sigmoid, got " + std::string(op_tag(kind)));
  }
}

LinearRelaxation relax_square(const IntervalVector& pre) { return from_scalar(pre, square_rule); }

LinearRelaxation relax_heaviside(const IntervalVector& pre) {
  const int d = pre.dim();
  Vector lb(d), ub(d);
  for (int k = 0; k < d; ++k) {
    const double l = pre.lower[k], u = pre.upper[k];
    // step(0) = 0, so only a strictly positive box is the constant 1
    lb[k] = l > 0.0 ? 1.0 : 0.0;
    ub[k] = u > 0.0 ? 1.0 : 0.0;
  }
  LinearRelaxation out;
  out.lower.push_back(CoeffBlock::diagonal(Vector::Zero(d)));
  out.upper.push_back(CoeffBlock::diagonal(Vector::Zero(d)));
  out.lower_bias = lb;
  out.upper_bias = ub;
  return out;
}

LinearRelaxation relax_mul(const IntervalVector& x, const IntervalVector& y, int lower_choice,
                           int upper_choice) {
  const int d = x.dim();
  Vector lx(d), ly(d), lbias(d), ux(d), uy(d), ubias(d);
  for (int k = 0; k < d; ++k) {
    const double xl = x.lower[k], xu = x.upper[k], yl = y.lower[k], yu = y.upper[k];
    if (lower_choice == 2) {
      lx[k] = yu;
      ly[k] = xu;
      lbias[k] = -xu * yu;
    } else {
      lx[k] = yl;
      ly[k] = xl;
      lbias[k] = -xl * yl;
    }
    if (upper_choice == 2) {
      ux[k] = yu;
      uy[k] = xl;
      ubias[k] = -xl * yu;
    } else {
      ux[k] = yl;
      uy[k] = xu;
      ubias[k] = -xu * yl;
    }
  }
  LinearRelaxation out;
  out.lower = {CoeffBlock::diagonal(lx), CoeffBlock::diagonal(ly)};
  out.upper = {CoeffBlock::diagonal(ux), CoeffBlock::diagonal(uy)};
  out.lower_bias = lbias;
  out.upper_bias = ubias;
  return out;
}

LinearRelaxation relax_affine(const std::vector<Matrix>& blocks, const Vector& bias) {
  LinearRelaxation out;
  for (const auto& b : blocks) {
    out.lower.push_back(CoeffBlock::dense(b));
    out.upper.push_back(CoeffBlock::dense(b));
  }
  out.lower_bias = out.upper_bias = bias;
  out.exact = true;
  return out;
}

namespace {

LinearRelaxation exact_diag(const std::vector<Vector>& diags, const Vector& bias) {
  LinearRelaxation out;
  for (const auto& d : diags) {
    out.lower.push_back(CoeffBlock::diagonal(d));
    out.upper.push_back(CoeffBlock::diagonal(d));
  }
  out.lower_bias = out.upper_bias = bias;
  out.exact = true;
  return out;
}

}  // namespace

LinearRelaxation relax_node(const Graph& graph, NodeIndex i, const PreBox& pre,
                            const RelaxParams& params) {
  const Node& node = graph.node(i);
  const int d = graph.dim(i);
  const auto& ps = graph.parents(i);
  switch (node.kind) {
    case OpKind::Input:
      throw GraphError("unsupported operator for relaxation: input (node '" + node.id + "')");
    case OpKind::Constant:
      return relax_affine({}, node.value);
    case OpKind::Affine: {
      std::vector<Matrix> blocks;
      for (size_t k = 0; k < ps.size(); ++k) blocks.emplace_back(graph.weight_block(i, static_cast<int>(k)));
      return relax_affine(blocks, node.bias.size() ? node.bias : Vector::Zero(d));
    }
    case OpKind::Add:
      return exact_diag(std::vector<Vector>(ps.size(), Vector::Ones(d)), Vector::Zero(d));
    case OpKind::Sub:
      return exact_diag({Vector::Ones(d), -Vector::Ones(d)}, Vector::Zero(d));
    case OpKind::Neg:
      return exact_diag({-Vector::Ones(d)}, Vector::Zero(d));
    case OpKind::Scale:
      return exact_diag({Vector::Constant(d, node.factor)}, Vector::Zero(d));
    case OpKind::Concat: {
      std::vector<Matrix> blocks;
      int off = 0;
      for (NodeIndex p : ps) {
        Matrix b = Matrix::Zero(d, graph.dim(p));
        b.block(off, 0, graph.dim(p), graph.dim(p)).setIdentity();
        off += graph.dim(p);
        blocks.push_back(std::move(b));
      }
      return relax_affine(blocks, Vector::Zero(d));
    }
    case OpKind::Slice: {
      Matrix b = Matrix::Zero(d, graph.dim(ps[0]));
      b.block(0, node.lo, d, d).setIdentity();
      return relax_affine({b}, Vector::Zero(d));
    }
    case OpKind::SumReduce:
      return relax_affine({Matrix::Ones(1, graph.dim(ps[0]))}, Vector::Zero(1));
    case OpKind::ReLU: {
      auto it = params.relu_alpha.find(i);
      return relax_relu(pre.at(0), it == params.relu_alpha.end() ? nullptr : &it->second);
    }
    case OpKind::Tanh:
    case OpKind::Sigmoid:
      return relax_sshape(node.kind, pre.at(0));
    case OpKind::Sin:
      return relax_sin(pre.at(0));
    case OpKind::Cos:
      return relax_cos(pre.at(0));
    case OpKind::Square:
      return relax_square(pre.at(0));
    case OpKind::Heaviside:
      return relax_heaviside(pre.at(0));
    case OpKind::Mul: {
      if (ps[0] == ps[1]) {
        // x*x: use the square rule, split evenly over both parent slots.
        LinearRelaxation sq = relax_square(pre.at(0));
        LinearRelaxation out;
        const Vector hl = 0.5 * sq.lower[0].diag(), hu = 0.5 * sq.upper[0].diag();
        out.lower = {CoeffBlock::diagonal(hl), CoeffBlock::diagonal(hl)};
        out.upper = {CoeffBlock::diagonal(hu), CoeffBlock::diagonal(hu)};
        out.lower_bias = sq.lower_bias;
        out.upper_bias = sq.upper_bias;
        return out;
      }
      return relax_mul(pre.at(0), pre.at(1), params.mul_lower_choice, params.mul_upper_choice);
    }
  }
  throw GraphError("unsupported operator for relaxation: " + std::string(op_tag(node.kind)));
}

}  // namespace boxcert
