// Relaxations for sin, tanh and sigmoid.
//
// Each function is described by its derivative, curvature sign and the
// solutions of f'(x) = s. A candidate line is made sound by lowering its
// bias to the exact minimum gap f(x) - line(x), which is attained at an
// endpoint or at a solution of f'(x) = slope. Among the sound candidates the
// one with the largest value at the interval midpoint (largest enclosed
// area) is kept. Upper lines are lower lines of -f.

#include "boxcert/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace boxcert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

class SmoothFn {
 public:
  virtual ~SmoothFn() = default;
  virtual double f(double x) const = 0;
  virtual double df(double x) const = 0;
  virtual double d2f(double x) const = 0;
  /// Sign changes of f'' strictly inside (l, u), ascending.
  virtual std::vector<double> inflections(double l, double u) const = 0;
  /// Points of [l, u] where f'(x) = s.
  virtual std::vector<double> stationary(double s, double l, double u) const = 0;
};

class SinFn final : public SmoothFn {
 public:
  double f(double x) const override { return std::sin(x); }
  double df(double x) const override { return std::cos(x); }
  double d2f(double x) const override { return -std::sin(x); }
  std::vector<double> inflections(double l, double u) const override {
    std::vector<double> out;
    for (double k = std::floor(l / kPi) + 1; k * kPi < u; k += 1) out.push_back(k * kPi);
    return out;
  }
  std::vector<double> stationary(double s, double l, double u) const override {
    std::vector<double> out;
    if (s < -1.0 || s > 1.0) return out;
    const double a = std::acos(s);
    for (double base : {a, -a}) {
      for (double k = std::ceil((l - base) / kTwoPi); base + k * kTwoPi <= u; k += 1) {
        out.push_back(base + k * kTwoPi);
      }
    }
    return out;
  }
};

class TanhFn final : public SmoothFn {
 public:
  double f(double x) const override { return std::tanh(x); }
  double df(double x) const override {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  }
  double d2f(double x) const override {
    const double t = std::tanh(x);
    return -2.0 * t * (1.0 - t * t);
  }
  std::vector<double> inflections(double l, double u) const override {
    if (l < 0.0 && u > 0.0) return {0.0};
    return {};
  }
  std::vector<double> stationary(double s, double l, double u) const override {
    std::vector<double> out;
    if (!(s > 0.0) || s > 1.0) return out;
    const double r = std::sqrt(1.0 - s);
    if (r >= 1.0) return out;
    const double x = std::atanh(r);
    for (double c : {x, -x}) {
      if (c >= l && c <= u) out.push_back(c);
    }
    return out;
  }
};

class SigmoidFn final : public SmoothFn {
 public:
  double f(double x) const override { return sigmoid(x); }
  double df(double x) const override {
    const double v = sigmoid(x);
    return v * (1.0 - v);
  }
  double d2f(double x) const override {
    const double v = sigmoid(x);
    return v * (1.0 - v) * (1.0 - 2.0 * v);
  }
  std::vector<double> inflections(double l, double u) const override {
    if (l < 0.0 && u > 0.0) return {0.0};
    return {};
  }
  std::vector<double> stationary(double s, double l, double u) const override {
    std::vector<double> out;
    if (!(s > 0.0) || s > 0.25) return out;
    const double r = std::sqrt(std::max(0.0, 1.0 - 4.0 * s));
    for (double v : {(1.0 + r) / 2.0, (1.0 - r) / 2.0}) {
      if (v <= 0.0 || v >= 1.0) continue;
      const double c = std::log(v / (1.0 - v));
      if (c >= l && c <= u) out.push_back(c);
    }
    return out;
  }
};

class Negated final : public SmoothFn {
 public:
  explicit Negated(const SmoothFn& g) : g_(g) {}
  double f(double x) const override { return -g_.f(x); }
  double df(double x) const override { return -g_.df(x); }
  double d2f(double x) const override { return -g_.d2f(x); }
  std::vector<double> inflections(double l, double u) const override { return g_.inflections(l, u); }
  std::vector<double> stationary(double s, double l, double u) const override {
    return g_.stationary(-s, l, u);
  }

 private:
  const SmoothFn& g_;
};

Line tangent(const SmoothFn& fn, double t) {
  const double s = fn.df(t);
  return {s, fn.f(t) - s * t};
}

Line secant(const SmoothFn& fn, double l, double u) {
  const double s = (fn.f(u) - fn.f(l)) / (u - l);
  return {s, fn.f(l) - s * l};
}

// Lowers the bias until the line is below fn on [l, u]; pads when a
// correction (or a numerical search) was involved.
Line make_sound(const SmoothFn& fn, Line line, double l, double u, bool searched) {
  double min_gap = std::min(fn.f(l) - line.at(l), fn.f(u) - line.at(u));
  for (double x : fn.stationary(line.slope, l, u)) {
    min_gap = std::min(min_gap, fn.f(x) - line.at(x));
  }
  if (min_gap < 0.0) {
    line.bias += min_gap - kRelaxPad;
  } else if (searched) {
    line.bias -= kRelaxPad;
  }
  return line;
}

// Largest t in a convex piece [a, b] whose tangent stays below f at the
// right endpoint u.
double tangent_through_right(const SmoothFn& fn, double a, double b, double u) {
  auto h = [&](double t) { return fn.f(t) + fn.df(t) * (u - t) - fn.f(u); };
  if (h(b) <= 0.0) return b;
  double lo = a, hi = b;
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) <= 0.0) lo = mid;
    else hi = mid;
  }
  return lo;
}

// Smallest t in a convex piece [a, b] whose tangent stays below f at the left
// endpoint l.
double tangent_through_left(const SmoothFn& fn, double a, double b, double l) {
  auto h = [&](double t) { return fn.f(t) + fn.df(t) * (l - t) - fn.f(l); };
  if (h(a) <= 0.0) return a;
  double lo = a, hi = b;
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) <= 0.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

Line lower_line(const SmoothFn& fn, double l, double u) {
  const double mid = 0.5 * (l + u);
  std::vector<double> cuts = fn.inflections(l, u);
  if (cuts.empty()) {
    if (fn.d2f(mid) >= 0.0) return make_sound(fn, tangent(fn, mid), l, u, false);
    return make_sound(fn, secant(fn, l, u), l, u, false);
  }

  std::vector<std::pair<double, double>> pieces;
  double start = l;
  for (double c : cuts) {
    pieces.emplace_back(start, c);
    start = c;
  }
  pieces.emplace_back(start, u);
  auto convex = [&](const std::pair<double, double>& p) {
    return fn.d2f(0.5 * (p.first + p.second)) >= 0.0;
  };

  std::vector<Line> candidates;
  candidates.push_back(make_sound(fn, secant(fn, l, u), l, u, false));
  if (convex(pieces.front())) {
    const double t = tangent_through_right(fn, pieces.front().first, pieces.front().second, u);
    candidates.push_back(make_sound(fn, tangent(fn, t), l, u, true));
  }
  if (convex(pieces.back())) {
    const double t = tangent_through_left(fn, pieces.back().first, pieces.back().second, l);
    candidates.push_back(make_sound(fn, tangent(fn, t), l, u, true));
  }
  for (const auto& p : pieces) {
    if (convex(p)) candidates.push_back(make_sound(fn, tangent(fn, 0.5 * (p.first + p.second)), l, u, false));
  }
  candidates.push_back(make_sound(fn, Line{0.0, fn.f(l)}, l, u, false));

  Line best = candidates.front();
  for (const Line& c : candidates) {
    if (c.at(mid) > best.at(mid)) best = c;
  }
  return best;
}

ScalarRelaxation relax_scalar(const SmoothFn& fn, double l, double u) {
  if (!(u > l)) {
    const double v = fn.f(l);
    return {{0.0, v}, {0.0, v}};
  }
  ScalarRelaxation r;
  r.lower = lower_line(fn, l, u);
  const Line neg = lower_line(Negated(fn), l, u);
  r.upper = {-neg.slope, -neg.bias};
  return r;
}

}  // namespace

ScalarRelaxation relax_sin_scalar(double l, double u) {
  if (u - l >= kTwoPi) return {{0.0, -1.0}, {0.0, 1.0}};
  // Reduce to a representative period; the line is shifted back afterwards.
  const double k = std::floor((l + kPi) / kTwoPi);
  const double shift = k * kTwoPi;
  ScalarRelaxation r = relax_scalar(SinFn{}, l - shift, u - shift);
  r.lower.bias -= r.lower.slope * shift;
  r.upper.bias -= r.upper.slope * shift;
  if (shift != 0.0 && u > l) {
    // Re-check after the shift to absorb its rounding.
    const SinFn fn;
    r.lower = make_sound(fn, r.lower, l, u, false);
    const Negated nf(fn);
    Line nu = make_sound(nf, Line{-r.upper.slope, -r.upper.bias}, l, u, false);
    r.upper = {-nu.slope, -nu.bias};
  }
  return r;
}

ScalarRelaxation relax_tanh_scalar(double l, double u) { return relax_scalar(TanhFn{}, l, u); }

ScalarRelaxation relax_sigmoid_scalar(double l, double u) { return relax_scalar(SigmoidFn{}, l, u); }

}  // namespace boxcert
