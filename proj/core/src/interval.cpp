#include "boxcert/interval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace boxcert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// True when some point  phase + 2kπ  lies in [l, u].
bool hits_phase(double l, double u, double phase) {
  const double k = std::ceil((l - phase) / kTwoPi);
  return phase + k * kTwoPi <= u;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

bool IntervalVector::contains(const Vector& v, double slack) const {
  if (v.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lower[i] - slack && v[i] <= upper[i] + slack)) return false;
  }
  return true;
}

IntervalVector IntervalVector::intersect(const IntervalVector& other) const {
  IntervalVector r{lower.cwiseMax(other.lower), upper.cwiseMin(other.upper)};
  // Both operands are sound, so a crossing can only come from rounding.
  for (Eigen::Index i = 0; i < r.lower.size(); ++i) {
    if (r.lower[i] > r.upper[i]) {
      const double m = 0.5 * (r.lower[i] + r.upper[i]);
      r.lower[i] = r.upper[i] = m;
    }
  }
  return r;
}

bool IntervalVector::subset_of(const IntervalVector& other, double tol) const {
  return (lower.array() >= other.lower.array() - tol).all() &&
         (upper.array() <= other.upper.array() + tol).all();
}

std::pair<double, double> sin_range(double l, double u) {
  if (u - l >= kTwoPi) return {-1.0, 1.0};
  double lo = std::min(std::sin(l), std::sin(u));
  double hi = std::max(std::sin(l), std::sin(u));
  if (hits_phase(l, u, kPi / 2)) hi = 1.0;
  if (hits_phase(l, u, -kPi / 2)) lo = -1.0;
  return {lo, hi};
}

std::pair<double, double> cos_range(double l, double u) {
  if (u - l >= kTwoPi) return {-1.0, 1.0};
  double lo = std::min(std::cos(l), std::cos(u));
  double hi = std::max(std::cos(l), std::cos(u));
  if (hits_phase(l, u, 0.0)) hi = 1.0;
  if (hits_phase(l, u, kPi)) lo = -1.0;
  return {lo, hi};
}

IntervalVector interval_op(const Graph& graph, NodeIndex i,
                           const std::vector<const IntervalVector*>& ps) {
  const Node& node = graph.node(i);
  const int d = graph.dim(i);
  auto elementwise = [&](auto&& fn) {
    IntervalVector r{Vector(d), Vector(d)};
    for (int k = 0; k < d; ++k) {
      auto [lo, hi] = fn(ps[0]->lower[k], ps[0]->upper[k]);
      r.lower[k] = lo;
      r.upper[k] = hi;
    }
    return r;
  };
  switch (node.kind) {
    case OpKind::Input:
      throw GraphError("interval_op called on input node '" + node.id + "'");
    case OpKind::Constant:
      return IntervalVector::point(node.value);
    case OpKind::Affine: {
      Vector lo = node.bias.size() ? node.bias : Vector::Zero(d);
      Vector hi = lo;
      for (size_t k = 0; k < ps.size(); ++k) {
        const auto w = graph.weight_block(i, static_cast<int>(k));
        const Matrix wp = w.cwiseMax(0.0);
        const Matrix wn = w.cwiseMin(0.0);
        lo.noalias() += wp * ps[k]->lower + wn * ps[k]->upper;
        hi.noalias() += wp * ps[k]->upper + wn * ps[k]->lower;
      }
      return {lo, hi};
    }
    case OpKind::Add: {
      IntervalVector r = *ps[0];
      for (size_t k = 1; k < ps.size(); ++k) {
        r.lower += ps[k]->lower;
        r.upper += ps[k]->upper;
      }
      return r;
    }
    case OpKind::Sub:
      return {ps[0]->lower - ps[1]->upper, ps[0]->upper - ps[1]->lower};
    case OpKind::Neg:
      return {-ps[0]->upper, -ps[0]->lower};
    case OpKind::Scale:
      if (node.factor >= 0) return {node.factor * ps[0]->lower, node.factor * ps[0]->upper};
      return {node.factor * ps[0]->upper, node.factor * ps[0]->lower};
    case OpKind::Mul: {
      IntervalVector r{Vector(d), Vector(d)};
      const bool same = graph.parents(i)[0] == graph.parents(i)[1];
      for (int k = 0; k < d; ++k) {
        const double xl = ps[0]->lower[k], xu = ps[0]->upper[k];
        if (same) {
          const double a = xl * xl, b = xu * xu;
          r.lower[k] = (xl <= 0 && xu >= 0) ? 0.0 : std::min(a, b);
          r.upper[k] = std::max(a, b);
          continue;
        }
        const double yl = ps[1]->lower[k], yu = ps[1]->upper[k];
        const double c[4] = {xl * yl, xl * yu, xu * yl, xu * yu};
        r.lower[k] = *std::min_element(c, c + 4);
        r.upper[k] = *std::max_element(c, c + 4);
      }
      return r;
    }
    case OpKind::Square:
      return elementwise([](double l, double u) {
        const double a = l * l, b = u * u;
        return std::pair{(l <= 0 && u >= 0) ? 0.0 : std::min(a, b), std::max(a, b)};
      });
    case OpKind::ReLU:
      return {ps[0]->lower.cwiseMax(0.0), ps[0]->upper.cwiseMax(0.0)};
    case OpKind::Heaviside:
      return elementwise([](double l, double u) {
        return std::pair{l > 0 ? 1.0 : 0.0, u > 0 ? 1.0 : 0.0};
      });
    case OpKind::Tanh:
      return elementwise([](double l, double u) { return std::pair{std::tanh(l), std::tanh(u)}; });
    case OpKind::Sigmoid:
      return elementwise([](double l, double u) { return std::pair{sigmoid(l), sigmoid(u)}; });
    case OpKind::Sin:
      return elementwise([](double l, double u) { return sin_range(l, u); });
    case OpKind::Cos:
      return elementwise([](double l, double u) { return cos_range(l, u); });
    case OpKind::Concat: {
      IntervalVector r{Vector(d), Vector(d)};
      Eigen::Index off = 0;
      for (const auto* p : ps) {
        r.lower.segment(off, p->dim()) = p->lower;
        r.upper.segment(off, p->dim()) = p->upper;
        off += p->dim();
      }
      return r;
    }
    case OpKind::Slice:
      return {ps[0]->lower.segment(node.lo, d), ps[0]->upper.segment(node.lo, d)};
    case OpKind::SumReduce:
      return {Vector::Constant(1, ps[0]->lower.sum()), Vector::Constant(1, ps[0]->upper.sum())};
  }
  throw GraphError("unhandled operator");
}

}  // namespace boxcert
