#include "boxcert/control.hpp"

#include "boxcert/graph_builder.hpp"
#include "boxcert/jacobian.hpp"

#include <stdexcept>

namespace boxcert {

int SystemBundle::state_dim() const {
  if (!dynamics) throw GraphError("bundle '" + name + "' has no dynamics fragment");
  if (dynamics->inputs().empty()) throw GraphError("dynamics fragment has no inputs");
  return dynamics->dim(dynamics->inputs().front());
}

std::pair<int, int> CertificateProblem::range(const std::string& name) const {
  for (const auto& [n, r] : layout) {
    if (n == name) return r;
  }
  throw GraphError("problem output has no range named '" + name + "'");
}

namespace {

void require_param(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

const Graph& need(const std::optional<Graph>& g, const char* role) {
  if (!g) throw GraphError(std::string("bundle is missing the '") + role + "' fragment");
  return *g;
}

void check_scalar(const Graph& g, const char* role, int input_dim) {
  if (g.output_dim() != 1) throw GraphError(std::string(role) + " fragment must have a scalar output");
  if (g.inputs().size() != 1 || g.input_dim() != input_dim) {
    throw GraphError(std::string(role) + " fragment must take one input of dimension " +
                     std::to_string(input_dim));
  }
}

// f(x, pi(x)[, w]) inside the builder.
std::string apply_dynamics(GraphBuilder& b, const SystemBundle& s, const std::string& x,
                           const std::string* w, const std::string& prefix) {
  const Graph& f = need(s.dynamics, "dynamics");
  std::vector<std::string> bind{x};
  if (s.controller) bind.push_back(b.inline_graph(*s.controller, {x}, prefix + ".pi"));
  if (w) bind.push_back(*w);
  if (bind.size() != f.inputs().size()) {
    throw GraphError("dynamics fragment takes " + std::to_string(f.inputs().size()) + " input(s), the " +
                     "problem supplies " + std::to_string(bind.size()));
  }
  const std::string out = b.inline_graph(f, bind, prefix + ".f");
  if (b.dim(out) != b.dim(x)) throw GraphError("dynamics output dimension differs from the state dimension");
  return out;
}

// Concatenates named parts and records their ranges.
struct Outputs {
  std::vector<std::string> ids;
  OutputLayout layout;
  int size = 0;

  void add(GraphBuilder& b, const std::string& name, const std::string& id) {
    const int d = b.dim(id);
    ids.push_back(id);
    layout.push_back({name, {size, size + d}});
    size += d;
  }
  int at(const std::string& name) const {
    for (const auto& [n, r] : layout) {
      if (n == name) return r.first;
    }
    throw GraphError("no output named '" + name + "'");
  }
};

Atom unit_atom(int m, std::initializer_list<std::pair<int, double>> terms, double bias) {
  Vector c = Vector::Zero(m);
  for (const auto& [i, v] : terms) c[i] += v;
  return {c, bias};
}

CertificateProblem finish(GraphBuilder& b, Outputs& out, std::vector<Clause> clauses, Box box) {
  CertificateProblem p{b.build(b.concat(out.ids, "outputs")), {}, out.layout};
  p.spec.clauses = std::move(clauses);
  p.spec.input_box = std::move(box);
  check_spec(p.spec, p.graph);
  return p;
}

Box join(const Box& a, const Box& b) {
  Vector lo(a.dim() + b.dim()), hi(a.dim() + b.dim());
  lo << a.lower, b.lower;
  hi << a.upper, b.upper;
  return Box(lo, hi);
}

// vᵀ M v with M given by its upper-triangular entries (row-major), or the
// identity when `metric` is empty.
std::string quadratic_form(GraphBuilder& b, const std::string& metric, const std::string& v, int n,
                           const std::string& hint) {
  if (metric.empty()) return b.sum(b.unary(OpKind::Square, v, hint + "_sq"), hint);
  std::vector<std::string> prods;
  std::vector<double> weight;
  for (int i = 0; i < n; ++i) {
    const std::string vi = b.slice(v, i, i + 1, hint + "_c");
    for (int j = i; j < n; ++j) {
      if (i == j) {
        prods.push_back(b.unary(OpKind::Square, vi, hint + "_sq"));
        weight.push_back(1.0);
      } else {
        prods.push_back(b.mul(vi, b.slice(v, j, j + 1, hint + "_c"), hint + "_x"));
        weight.push_back(2.0);
      }
    }
  }
  const std::string p = b.concat(prods, hint + "_terms");
  Vector w = Eigen::Map<Vector>(weight.data(), static_cast<Eigen::Index>(weight.size()));
  const std::string pw = b.affine({p}, w.asDiagonal().toDenseMatrix(), Vector(), hint + "_w");
  return b.dot(metric, pw, hint);
}

}  // namespace

Graph closed_loop(const SystemBundle& bundle) {
  GraphBuilder b(bundle.name + ".closed_loop");
  const std::string x = b.input("x", bundle.state_dim());
  return b.build(apply_dynamics(b, bundle, x, nullptr, "g"));
}

ScalarBounds reach_step(const SystemBundle& bundle, const Box& box, BoundMode mode) {
  return output_bounds(closed_loop(bundle), box, RelaxParams{}, mode).bounds;
}

ReachTube reach_tube(const SystemBundle& bundle, const Box& box, int steps, double ceiling, BoundMode mode) {
  require_param(steps >= 1, "reach_tube: steps must be at least 1");
  const Graph g = closed_loop(bundle);
  ReachTube tube;
  Box cur = box;
  for (int k = 0; k < steps; ++k) {
    ScalarBounds next = output_bounds(g, cur, RelaxParams{}, mode).bounds;
    tube.steps.push_back(next);
    if ((next.upper - next.lower).maxCoeff() > ceiling) {
      tube.diverged = true;
      tube.diverged_at = k;
      break;
    }
    cur = Box(next.lower, next.upper);
  }
  return tube;
}

CertificateProblem build_discrete_lyapunov(const SystemBundle& bundle, const Box& box,
                                           const LevelParams& params) {
  require_param(params.rho > 0.0, "rho must be positive");
  require_param(params.kappa > 0.0 && params.kappa < 1.0, "kappa must lie in (0, 1)");
  const int n = bundle.state_dim();
  const Graph& v = need(bundle.certificate, "certificate");
  check_scalar(v, "certificate", n);
  require_param(box.dim() == n, "box dimension differs from the state dimension");

  GraphBuilder b(bundle.name + ".lyap_discrete");
  const std::string x = b.input("x", n);
  const std::string gx = apply_dynamics(b, bundle, x, nullptr, "g");
  const std::string vx = b.inline_graph(v, {x}, "V");
  const std::string vgx = b.inline_graph(v, {gx}, "Vg");
  const std::string f = b.affine({vgx, vx}, (Matrix(1, 2) << 1.0, -(1.0 - params.kappa)).finished(),
                                 Vector(), "F");
  Outputs out;
  out.add(b, "F", f);
  out.add(b, "g", gx);
  out.add(b, "V", vx);
  const int m = out.size, iF = out.at("F"), iV = out.at("V");

  const Atom escape = unit_atom(m, {{iV, 1.0}}, -params.rho);
  std::vector<Clause> clauses{{{unit_atom(m, {{iF, -1.0}}, params.tol), escape}}};
  for (Atom& face : box_face_atoms(box, m, out.at("g"), params.tol)) clauses.push_back({{face, escape}});
  return finish(b, out, std::move(clauses), box);
}

CertificateProblem build_continuous_lyapunov(const SystemBundle& bundle, const Box& box,
                                             const LevelParams& params) {
  require_param(params.c1 > 0.0 && params.c1 < params.c2, "level parameters need 0 < c1 < c2");
  require_param(params.kappa > 0.0, "kappa must be positive");
  const int n = bundle.state_dim();
  const Graph& v = need(bundle.certificate, "certificate");
  check_scalar(v, "certificate", n);
  require_param(box.dim() == n, "box dimension differs from the state dimension");
  const AugmentedGraph vj = augment_with_jacobian(v);

  GraphBuilder b(bundle.name + ".lyap_continuous");
  const std::string x = b.input("x", n);
  const std::string fx = apply_dynamics(b, bundle, x, nullptr, "f");
  const std::string aug = b.inline_graph(vj.graph, {x}, "V");
  const std::string vx = b.slice(aug, vj.value_slice.first, vj.value_slice.second, "V");
  const std::string grad = b.slice(aug, vj.grad_slice.first, vj.grad_slice.second, "gradV");
  const std::string vdot = b.dot(grad, fx, "Vdot");
  const std::string f = b.affine({vdot, vx}, (Matrix(1, 2) << 1.0, params.kappa).finished(), Vector(), "F");
  Matrix normals = Matrix::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) {
    normals(2 * i, i) = -1.0;
    normals(2 * i + 1, i) = 1.0;
  }
  const std::string g = b.affine({fx}, normals, Vector(), "G");

  Outputs out;
  out.add(b, "F", f);
  out.add(b, "V", vx);
  out.add(b, "x", x);
  out.add(b, "G", g);
  const int m = out.size, iF = out.at("F"), iV = out.at("V"), ix = out.at("x"), iG = out.at("G");

  std::vector<Clause> clauses{{{unit_atom(m, {{iF, -1.0}}, params.tol), unit_atom(m, {{iV, 1.0}}, -params.c2),
                                unit_atom(m, {{iV, -1.0}}, params.c1)}}};
  const Atom outside = unit_atom(m, {{iV, 1.0}}, -params.c2);
  for (int i = 0; i < n; ++i) {
    // lower face x_i = l_i, then upper face x_i = u_i
    clauses.push_back({{unit_atom(m, {{iG + 2 * i, -1.0}}, params.tol),
                        unit_atom(m, {{ix + i, 1.0}}, -box.lower[i] - params.tol), outside}});
    clauses.push_back({{unit_atom(m, {{iG + 2 * i + 1, -1.0}}, params.tol),
                        unit_atom(m, {{ix + i, -1.0}}, box.upper[i] - params.tol), outside}});
  }
  return finish(b, out, std::move(clauses), box);
}

CertificateProblem build_robust_roa(const SystemBundle& bundle, const Box& box_x, const Box& box_w,
                                    const LevelParams& params) {
  require_param(params.rho > 0.0, "rho must be positive");
  require_param(params.kappa > 0.0 && params.kappa < 1.0, "kappa must lie in (0, 1)");
  require_param(params.nu / params.kappa <= params.rho, "robustness needs nu / kappa <= rho");
  const int n = bundle.state_dim();
  const Graph& v = need(bundle.certificate, "certificate");
  const Graph& psi = need(bundle.disturbance, "disturbance");
  check_scalar(v, "certificate", n);
  check_scalar(psi, "disturbance", box_w.dim());
  require_param(box_x.dim() == n, "state box dimension differs from the state dimension");

  GraphBuilder b(bundle.name + ".robust_roa");
  const std::string x = b.input("x", n);
  const std::string w = b.input("w", box_w.dim());
  const std::string fxw = apply_dynamics(b, bundle, x, &w, "g");
  const std::string vx = b.inline_graph(v, {x}, "V");
  const std::string vf = b.inline_graph(v, {fxw}, "Vg");
  const std::string pw = b.inline_graph(psi, {w}, "psi");
  const std::string f = b.affine({vf, vx, pw}, (Matrix(1, 3) << 1.0, -(1.0 - params.kappa), -1.0).finished(),
                                 Vector(), "F");
  Outputs out;
  out.add(b, "F", f);
  out.add(b, "g", fxw);
  out.add(b, "V", vx);
  out.add(b, "psi", pw);
  const int m = out.size;
  const Atom v_escape = unit_atom(m, {{out.at("V"), 1.0}}, -params.rho);
  const Atom w_escape = unit_atom(m, {{out.at("psi"), 1.0}}, -params.nu);

  std::vector<Clause> clauses{{{unit_atom(m, {{out.at("F"), -1.0}}, params.tol), v_escape, w_escape}}};
  for (Atom& face : box_face_atoms(box_x, m, out.at("g"), params.tol)) {
    clauses.push_back({{face, v_escape, w_escape}});
  }
  return finish(b, out, std::move(clauses), join(box_x, box_w));
}

CertificateProblem build_contraction(const SystemBundle& bundle, const Box& box, const LevelParams& params) {
  require_param(params.rho > 0.0, "rho must be positive");
  require_param(params.rate > 0.0, "contraction rate must be positive");
  require_param(params.epsilon >= 0.0, "epsilon must be nonnegative");
  const int n = bundle.state_dim();
  const Graph& v = need(bundle.certificate, "certificate");
  check_scalar(v, "certificate", n);
  require_param(box.dim() == n, "box dimension differs from the state dimension");
  if (bundle.metric) {
    const int k = n * (n + 1) / 2;
    if (bundle.metric->output_dim() != k || bundle.metric->input_dim() != n) {
      throw GraphError("metric fragment must map the state to " + std::to_string(k) +
                       " upper-triangular entries, got output dimension " +
                       std::to_string(bundle.metric->output_dim()));
    }
  }

  GraphBuilder b(bundle.name + ".contraction");
  const std::string x = b.input("x", n);
  const std::string d = b.input("delta", n);
  const std::string xd = b.add({x, d}, "x_plus_delta");
  const std::string gx = apply_dynamics(b, bundle, x, nullptr, "g");
  const std::string gxd = apply_dynamics(b, bundle, xd, nullptr, "gd");
  const std::string diff = b.sub(gxd, gx, "Df");
  std::string m_gx, m_x;
  if (bundle.metric) {
    m_gx = b.inline_graph(*bundle.metric, {gx}, "Mg");
    m_x = b.inline_graph(*bundle.metric, {x}, "M");
  }
  const std::string q1 = quadratic_form(b, m_gx, diff, n, "qf");
  const std::string q0 = quadratic_form(b, m_x, d, n, "qd");
  const std::string g = b.affine({q1, q0}, (Matrix(1, 2) << 1.0, -params.rate * params.rate).finished(),
                                 Vector(), "G");
  Outputs out;
  out.add(b, "G", g);
  out.add(b, "V", b.inline_graph(v, {x}, "V"));
  out.add(b, "V_shift", b.inline_graph(v, {xd}, "Vd"));
  out.add(b, "x_plus_delta", xd);
  const int m = out.size;

  Clause c{{unit_atom(m, {{out.at("G"), -1.0}}, params.tol)}};
  for (Atom& a : outside_box_atoms(box, m, out.at("x_plus_delta"), 0.0)) c.atoms.push_back(a);
  c.atoms.push_back(unit_atom(m, {{out.at("V"), 1.0}}, -params.rho));
  c.atoms.push_back(unit_atom(m, {{out.at("V_shift"), 1.0}}, -params.rho));
  const Box dbox(Vector::Constant(n, -params.epsilon), Vector::Constant(n, params.epsilon));
  return finish(b, out, {c}, join(box, dbox));
}

CertificateProblem build_barrier(const SystemBundle& bundle, const Box& box, const LevelParams& params,
                                 const std::vector<Vector>& vertices) {
  require_param(!vertices.empty(), "barrier condition needs at least one control vertex");
  require_param(params.alpha > 0.0, "alpha must be positive");
  const int n = bundle.state_dim();
  const Graph& f = need(bundle.dynamics, "dynamics");
  const Graph& h = need(bundle.certificate, "certificate");
  check_scalar(h, "certificate", n);
  require_param(box.dim() == n, "box dimension differs from the state dimension");
  if (f.inputs().size() != 2) throw GraphError("barrier dynamics must take (x, u)");
  const int udim = f.dim(f.inputs()[1]);
  for (const auto& u : vertices) {
    require_param(u.size() == udim, "control vertex dimension differs from the dynamics control input");
  }
  const AugmentedGraph hj = augment_with_jacobian(h);

  GraphBuilder b(bundle.name + ".barrier");
  const std::string x = b.input("x", n);
  const std::string aug = b.inline_graph(hj.graph, {x}, "h");
  const std::string hx = b.slice(aug, hj.value_slice.first, hj.value_slice.second, "h");
  const std::string grad = b.slice(aug, hj.grad_slice.first, hj.grad_slice.second, "gradh");
  Outputs out;
  for (size_t k = 0; k < vertices.size(); ++k) {
    const std::string u = b.constant(vertices[k], "u");
    const std::string fv = b.inline_graph(f, {x, u}, "f");
    const std::string lie = b.dot(grad, fv, "Lf");
    out.add(b, "B" + std::to_string(k),
            b.affine({lie, hx}, (Matrix(1, 2) << 1.0, params.alpha).finished(), Vector(), "B"));
  }
  out.add(b, "h", hx);
  const int m = out.size;
  Clause c;
  for (size_t k = 0; k < vertices.size(); ++k) {
    c.atoms.push_back(unit_atom(m, {{out.at("B" + std::to_string(k)), 1.0}}, params.tol));
  }
  c.atoms.push_back(unit_atom(m, {{out.at("h"), -1.0}}, 0.0));
  return finish(b, out, {c}, box);
}

}  // namespace boxcert
