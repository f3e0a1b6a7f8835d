#include "boxcert/fixtures.hpp"

#include "boxcert/graph_builder.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace boxcert {

namespace {

// Calls fn(x) on the grid and then on random samples; stops when fn
// returns false.
template <class Fn>
long sweep(const Box& box, int resolution, int random_points, std::uint64_t seed, Fn&& fn) {
  const int n = box.dim();
  if (n > 3) throw std::invalid_argument("grid oracle supports at most 3 input dimensions");
  std::vector<int> per(static_cast<size_t>(n));
  long total = 1;
  for (int k = 0; k < n; ++k) {
    per[static_cast<size_t>(k)] = box.upper[k] > box.lower[k] ? std::max(resolution, 2) : 1;
    total *= per[static_cast<size_t>(k)];
  }
  long count = 0;
  Vector x(n);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = 0; k < n; ++k) {
      const int m = per[static_cast<size_t>(k)];
      const long j = rem % m;
      rem /= m;
      x[k] = m == 1 ? box.lower[k]
                    : box.lower[k] + (box.upper[k] - box.lower[k]) * static_cast<double>(j) / (m - 1);
    }
    ++count;
    if (!fn(box.clamp(x))) return count;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < random_points; ++s) {
    for (int k = 0; k < n; ++k) x[k] = box.lower[k] + unit(rng) * (box.upper[k] - box.lower[k]);
    ++count;
    if (!fn(box.clamp(x))) return count;
  }
  return count;
}

Matrix normal_matrix(std::mt19937_64& rng, int rows, int cols, double sd) {
  std::normal_distribution<double> nd(0.0, sd);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = nd(rng);
  }
  return m;
}

Vector normal_vector(std::mt19937_64& rng, int n, double sd) {
  std::normal_distribution<double> nd(0.0, sd);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace

OracleResult grid_oracle(const Graph& graph, const SpecCNF& spec, const Box& box, int resolution,
                         int random_points, std::uint64_t seed) {
  OracleResult r;
  r.evaluations = sweep(box, resolution, random_points, seed, [&](const Vector& x) {
    const PointCheck pc = check_output(spec, evaluate(graph, x));
    if (pc.satisfied) return true;
    r.violated = true;
    r.x = x;
    r.clause_index = pc.clause_index;
    r.margin = pc.margin;
    return false;
  });
  return r;
}

OracleResult grid_min(const Graph& graph, const Vector& objective, const Box& box, int resolution,
                      const SpecCNF* constraints, int random_points, std::uint64_t seed) {
  OracleResult r;
  r.min_value = std::numeric_limits<double>::infinity();
  r.evaluations = sweep(box, resolution, random_points, seed, [&](const Vector& x) {
    const Vector y = evaluate(graph, x);
    if (constraints && !check_output(*constraints, y).satisfied) return true;
    const double v = objective.dot(y);
    if (v < r.min_value) {
      r.min_value = v;
      r.x = x;
    }
    return true;
  });
  return r;
}

Graph random_graph(std::uint64_t seed, int depth, int width, const std::vector<OpKind>& ops,
                   int input_dim, int output_dim) {
  if (depth < 1 || width < 1 || input_dim < 1 || output_dim < 1 || ops.empty()) {
    throw std::invalid_argument("random_graph: sizes must be positive and ops nonempty");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, ops.size() - 1);
  GraphBuilder b("random_" + std::to_string(seed));
  std::string prev = b.input("x", input_dim);
  auto layer = [&](const std::string& from, int out) {
    const int in = b.dim(from);
    return b.affine({from}, normal_matrix(rng, out, in, 1.0 / std::sqrt(in)), normal_vector(rng, out, 0.5), "lin");
  };
  for (int d = 0; d < depth; ++d) {
    const std::string h = layer(prev, width);
    const OpKind op = ops[pick(rng)];
    switch (op) {
      case OpKind::Affine:
        prev = h;
        break;
      case OpKind::ReLU:
      case OpKind::Tanh:
      case OpKind::Sigmoid:
      case OpKind::Sin:
      case OpKind::Cos:
      case OpKind::Square:
      case OpKind::Neg:
        prev = b.unary(op, h);
        break;
      case OpKind::Scale:
        prev = b.scale(h, std::uniform_real_distribution<double>(-2.0, 2.0)(rng));
        break;
      case OpKind::Mul:
        prev = b.mul(h, layer(prev, width));
        break;
      case OpKind::Add:
        prev = b.add({h, layer(prev, width)});
        break;
      case OpKind::Sub:
        prev = b.sub(h, layer(prev, width));
        break;
      case OpKind::Concat:
        prev = b.concat({h, layer(prev, 1)});
        break;
      case OpKind::Slice:
        prev = width > 1 ? b.slice(h, 1, width) : h;
        break;
      case OpKind::SumReduce:
        prev = b.concat({h, b.sum(h)});
        break;
      default:
        throw std::invalid_argument("random_graph: unsupported operator '" + std::string(op_tag(op)) + "'");
    }
  }
  return b.build(layer(prev, output_dim));
}

namespace fixtures {

namespace {

Matrix m11(double v) { return Matrix::Constant(1, 1, v); }
Vector v1(double v) { return Vector::Constant(1, v); }

Graph square_certificate(const std::string& name) {
  GraphBuilder b(name);
  const std::string x = b.input("x", 1);
  return b.build(b.unary(OpKind::Square, x, "V"));
}

}  // namespace

Graph toy_graph() {
  GraphBuilder b("toy");
  const std::string x = b.input("x", 1);
  const std::string s = b.scale(x, 2.0, "scaled");
  const std::string p = b.affine({s}, m11(1.0), v1(-1.0), "pre");
  const std::string a = b.unary(OpKind::ReLU, p, "act");
  return b.build(b.affine({a}, m11(1.0), v1(3.0), "out"));
}

Graph identity_graph(int dim) {
  GraphBuilder b("identity");
  return b.build(b.input("x", dim));
}

Graph linear_graph(double a) {
  GraphBuilder b("linear");
  const std::string x = b.input("x", 1);
  return b.build(b.scale(x, a, "y"));
}

Graph square_minus_one() {
  GraphBuilder b("square_minus_one");
  const std::string x = b.input("x", 1);
  const std::string s = b.unary(OpKind::Square, x, "sq");
  return b.build(b.affine({s}, m11(1.0), v1(-1.0), "y"));
}

Graph sin_graph() {
  GraphBuilder b("sin");
  const std::string x = b.input("x", 1);
  return b.build(b.unary(OpKind::Sin, x, "y"));
}

Graph tanh_net(std::uint64_t seed) {
  Graph g = random_graph(seed, 2, 8, {OpKind::Tanh}, 2, 1);
  GraphDef d = g.def();
  d.name = "tanh_net";
  return Graph::compile(std::move(d));
}

Graph sigmoid_net(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GraphBuilder b("sigmoid_net");
  const std::string x = b.input("x", 2);
  const std::string h = b.affine({x}, normal_matrix(rng, 6, 2, 0.8), normal_vector(rng, 6, 0.3), "l1");
  const std::string s = b.unary(OpKind::Sigmoid, h, "s");
  const std::string c = b.unary(OpKind::Sin, b.slice(x, 0, 1, "x0"), "feat");
  return b.build(b.affine({s, c}, normal_matrix(rng, 1, 7, 0.5), v1(0.1), "y"));
}

Graph relu_net(std::uint64_t seed) {
  Graph g = random_graph(seed, 2, 8, {OpKind::ReLU}, 2, 1);
  GraphDef d = g.def();
  d.name = "relu_net";
  return Graph::compile(std::move(d));
}

SystemBundle scalar_linear(double a) {
  SystemBundle s;
  s.name = "scalar_linear";
  s.dynamics = linear_graph(a);
  s.certificate = square_certificate("V");
  return s;
}

Matrix linear_2d_P() {
  Matrix a(2, 2);
  a << 0.9, 0.2, 0.0, 0.8;
  Matrix p = Matrix::Identity(2, 2);
  for (int it = 0; it < 10000; ++it) {
    const Matrix next = a.transpose() * p * a + Matrix::Identity(2, 2);
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (change < 1e-14) break;
  }
  return p;
}

SystemBundle linear_2d() {
  Matrix a(2, 2);
  a << 0.9, 0.2, 0.0, 0.8;
  SystemBundle s;
  s.name = "linear_2d";
  {
    GraphBuilder b("A");
    const std::string x = b.input("x", 2);
    s.dynamics = b.build(b.affine({x}, a, Vector(), "Ax"));
  }
  {
    // xᵀPx = |Lᵀx|^2 with P = L Lᵀ
    const Matrix l = Eigen::LLT<Matrix>(linear_2d_P()).matrixL();
    GraphBuilder b("V");
    const std::string x = b.input("x", 2);
    const std::string z = b.affine({x}, l.transpose(), Vector(), "Ltx");
    s.certificate = b.build(b.sum(b.unary(OpKind::Square, z, "z2"), "V"));
  }
  return s;
}

SystemBundle continuous_scalar(double sgn) {
  SystemBundle s;
  s.name = sgn > 0 ? "continuous_scalar" : "continuous_scalar_flipped";
  GraphBuilder b("f");
  const std::string x = b.input("x", 1);
  const std::string sx = b.unary(OpKind::Sin, x, "sinx");
  s.dynamics = b.build(b.affine({x, sx}, (Matrix(1, 2) << -sgn, 0.1 * sgn).finished(), Vector(), "f"));
  s.certificate = square_certificate("V");
  return s;
}

SystemBundle residual_net(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GraphBuilder b("residual");
  const std::string x = b.input("x", 1);
  const std::string h1 = b.unary(OpKind::ReLU, b.affine({x}, normal_matrix(rng, 16, 1, 1.0),
                                                       normal_vector(rng, 16, 0.5), "l1"), "r1");
  const std::string h2 = b.unary(OpKind::ReLU, b.affine({h1}, normal_matrix(rng, 16, 16, 0.25),
                                                        normal_vector(rng, 16, 0.5), "l2"), "r2");
  const std::string nn = b.affine({h2}, normal_matrix(rng, 1, 16, 0.25), normal_vector(rng, 1, 0.1), "l3");
  SystemBundle s;
  s.name = "residual_net";
  s.dynamics = b.build(b.affine({x, nn}, (Matrix(1, 2) << 1.0, 0.1).finished(), Vector(), "next"));
  return s;
}

SystemBundle robust_scalar(double psi_scale) {
  SystemBundle s;
  s.name = "robust_scalar";
  {
    GraphBuilder b("g");
    const std::string x = b.input("x", 1);
    const std::string w = b.input("w", 1);
    s.dynamics = b.build(b.affine({x, w}, (Matrix(1, 2) << 0.5, 1.0).finished(), Vector(), "g"));
  }
  s.certificate = square_certificate("V");
  {
    GraphBuilder b("psi");
    const std::string w = b.input("w", 1);
    s.disturbance = b.build(b.scale(b.unary(OpKind::Square, w, "w2"), psi_scale, "psi"));
  }
  return s;
}

SystemBundle barrier_scalar() {
  SystemBundle s;
  s.name = "barrier_scalar";
  {
    GraphBuilder b("f");
    b.input("x", 1);
    const std::string u = b.input("u", 1);
    GraphDef d = b.def(u);
    s.dynamics = Graph::compile(std::move(d));
  }
  {
    GraphBuilder b("h");
    const std::string x = b.input("x", 1);
    s.certificate = b.build(b.affine({b.unary(OpKind::Square, x, "x2")}, m11(-1.0), v1(1.0), "h"));
  }
  return s;
}

Graph mpc_graph() {
  GraphBuilder b("mpc");
  const std::string u = b.input("u", 1);
  const std::string s2 = b.unary(OpKind::Sin, b.scale(u, 2.0, "u2"), "sin2u");
  const std::string x1 = b.affine({u, s2}, (Matrix(1, 2) << 0.5, 0.2).finished(), v1(1.0), "x1");
  const std::string y0 = b.unary(OpKind::Square, x1, "y0");
  const std::string y1 = b.unary(OpKind::Square, b.affine({u}, m11(1.0), v1(-6.0), "du"), "y1");
  return b.build(b.concat({y0, y1}, "y"));
}

Graph branching_graph() {
  GraphBuilder b("branching");
  const std::string x = b.input("x", 2);
  const std::string s = b.unary(OpKind::Sin, b.affine({x}, (Matrix(1, 2) << 3.0, 0.0).finished(), Vector(), "a"), "s");
  return b.build(b.affine({s, x}, (Matrix(1, 3) << 1.0, -0.3, 0.001).finished(), v1(1.2), "y"));
}

SpecCNF threshold_spec(const Box& box, double threshold) {
  SpecCNF s;
  s.clauses = {{{make_atom(Vector::Ones(1), -threshold, Sense::Greater)}}};
  s.input_box = box;
  return s;
}

}  // namespace fixtures

}  // namespace boxcert
