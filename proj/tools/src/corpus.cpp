#include "boxcert/bundle_io.hpp"
#include "boxcert/cli.hpp"
#include "boxcert/fixtures.hpp"
#include "boxcert/graph_io.hpp"
#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace boxcert::cli {

namespace {

constexpr int kGrid1 = 20001;
constexpr int kGrid2 = 401;

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string pairs(const Box& b) {
  std::string s;
  for (int i = 0; i < b.dim(); ++i) {
    if (i) s += ' ';
    s += num(b.lower[i]) + ' ' + num(b.upper[i]);
  }
  return s;
}

Box interval(double lo, double hi) { return Box(Vector::Constant(1, lo), Vector::Constant(1, hi)); }
Box cube(int n, double lo, double hi) { return Box(Vector::Constant(n, lo), Vector::Constant(n, hi)); }

int resolution(const Box& b) { return b.dim() == 1 ? kGrid1 : kGrid2; }

json grid_record(const OracleResult& r, int res) {
  json o;
  o["kind"] = "grid";
  o["resolution"] = res;
  o["evaluations"] = r.evaluations;
  return o;
}

/// Expected verdict of a spec from the grid oracle alone.
json verdict(const Graph& g, const SpecCNF& spec, json& oracle) {
  const int res = resolution(spec.input_box);
  const OracleResult r = grid_oracle(g, spec, spec.input_box, res);
  oracle = grid_record(r, res);
  oracle["violation"] = r.violated;
  if (r.violated) return {{"exit", kFalsified}, {"status", "falsified"}};
  return {{"exit", kOk}, {"status", "verified"}};
}

class Corpus {
 public:
  explicit Corpus(std::filesystem::path dir) : dir_(std::move(dir)) {
    for (const char* sub : {"graphs", "specs", "bundles", "vertices"}) std::filesystem::create_directories(dir_ / sub);
  }

  std::string graph(const std::string& name, const Graph& g) {
    const std::string rel = "graphs/" + name + ".graph";
    write_text_file(dir_ / rel, serialize_graph(g.def()));
    return rel;
  }
  std::string spec(const std::string& name, const SpecCNF& s) {
    const std::string rel = "specs/" + name + ".spec";
    write_text_file(dir_ / rel, serialize_spec(s));
    return rel;
  }
  std::string bundle(const std::string& name, const SystemBundle& sys, const Box& box,
                     std::optional<Box> w_box = std::nullopt) {
    BundleFile f{sys, box, std::move(w_box)};
    f.system.name = name;
    const std::string rel = "bundles/" + name + ".bundle";
    write_text_file(dir_ / rel, serialize_bundle(f));
    return rel;
  }
  std::string vertices(const std::string& name, const std::vector<Vector>& vs) {
    json doc;
    doc["format_version"] = kFormatVersion;
    json arr = json::array();
    for (const Vector& v : vs) arr.push_back(to_json(v));
    doc["vertices"] = std::move(arr);
    const std::string rel = "vertices/" + name + ".json";
    write_text_file(dir_ / rel, doc.dump(2) + "\n");
    return rel;
  }

  void add(const std::string& name, json args, json expect, json oracle) {
    cases_.push_back({{"name", name}, {"args", std::move(args)}, {"expect", std::move(expect)}, {"oracle", std::move(oracle)}});
  }

  void verify_case(const std::string& name, const Graph& g, const SpecCNF& s) {
    const std::string gp = graph(name, g);
    const std::string sp = spec(name, s);
    json oracle;
    json expect = verdict(g, s, oracle);
    add("verify-" + name, {"verify", "--graph", gp, "--spec", sp}, std::move(expect), std::move(oracle));
  }

  void certify_case(const std::string& name, const std::string& bundle_rel, const std::string& kind,
                    const CertificateProblem& prob, std::vector<std::string> flags) {
    json oracle;
    json expect = verdict(prob.graph, prob.spec, oracle);
    json args = {"certify", "--kind", kind, "--system", bundle_rel};
    for (auto& f : flags) args.push_back(std::move(f));
    add("certify-" + name, std::move(args), std::move(expect), std::move(oracle));
  }

  void optimize_case(const std::string& name, const std::string& graph_rel, const Graph& g, const Vector& obj,
                     const Box& box, bool maximizing, const SpecCNF* cons, const std::string& cons_rel) {
    const int res = box.dim() == 1 ? 100001 : kGrid2;
    const OracleResult r = grid_min(g, maximizing ? Vector(-obj) : obj, box, res, cons);
    const double value = maximizing ? -r.min_value : r.min_value;
    std::string row;
    for (Eigen::Index i = 0; i < obj.size(); ++i) row += (i ? " " : "") + num(obj[i]);
    json args = {maximizing ? "maximize" : "minimize", "--graph", graph_rel, "--objective", row, "--box", pairs(box)};
    if (cons) {
      args.push_back("--constraints");
      args.push_back(cons_rel);
    }
    json oracle = grid_record(r, res);
    oracle["argmin"] = to_json(r.x);
    add(std::string(maximizing ? "maximize-" : "minimize-") + name, std::move(args),
        {{"exit", kOk}, {"status", "optimal-within-gap"}, {"optimum", {{"value", value}, {"tol", 1e-3}}}},
        std::move(oracle));
  }

  void finish(json branching) {
    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["cases"] = cases_;
    manifest["branching"] = std::move(branching);
    write_text_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  json cases_ = json::array();
};

}  // namespace

void write_fixture_corpus(const std::filesystem::path& dir) {
  using namespace fixtures;
  constexpr double kPi = std::numbers::pi;
  Corpus c(dir);

  // Toy graph bounds; the grid extremes are the exact range.
  {
    const Graph g = toy_graph();
    const std::string gp = c.graph("toy", g);
    const Box box = interval(-1, 1);
    const OracleResult lo = grid_min(g, Vector::Ones(1), box, kGrid1);
    const OracleResult hi = grid_min(g, -Vector::Ones(1), box, kGrid1);
    json oracle = grid_record(lo, kGrid1);
    c.add("bounds-toy", {"bounds", "--graph", gp, "--box", pairs(box)},
          {{"exit", kOk}, {"bounds", {{"lower", {lo.min_value}}, {"upper", {-hi.min_value}}, {"tol", 1e-9}}}},
          std::move(oracle));
  }

  c.verify_case("sin_lower", sin_graph(), threshold_spec(interval(0, 2 * kPi), -1.5));
  c.verify_case("square_positive", square_minus_one(), threshold_spec(interval(-2, 2), 0.0));
  {
    const Box box = cube(2, -1, 1);
    const Graph tn = tanh_net(1);
    const double tmin = grid_min(tn, Vector::Ones(1), box, kGrid2).min_value;
    c.verify_case("tanh_net", tn, threshold_spec(box, tmin - 0.05));
    const Graph rn = relu_net(2);
    const double rmin = grid_min(rn, Vector::Ones(1), box, kGrid2).min_value;
    c.verify_case("relu_net", rn, threshold_spec(box, rmin + 0.05));
  }
  {
    LevelParams p;
    p.kappa = 0.5;
    CertificateProblem good = build_discrete_lyapunov(scalar_linear(), interval(-1, 1), p);
    c.verify_case("lyap", good.graph, good.spec);
    p.kappa = 0.9;
    CertificateProblem bad = build_discrete_lyapunov(scalar_linear(), interval(-1, 1), p);
    c.verify_case("lyap_broken", bad.graph, bad.spec);
  }

  // Control certificates through bundles.
  {
    const Box b1 = interval(-1, 1);
    const std::string sl = c.bundle("scalar_linear", scalar_linear(), b1);
    LevelParams p;
    p.kappa = 0.5;
    c.certify_case("lyap-scalar", sl, "lyap-discrete", build_discrete_lyapunov(scalar_linear(), b1, p),
                   {"--kappa", "0.5", "--rho", "1"});
    p.kappa = 0.9;
    c.certify_case("lyap-scalar-broken", sl, "lyap-discrete", build_discrete_lyapunov(scalar_linear(), b1, p),
                   {"--kappa", "0.9", "--rho", "1"});

    // 2-D linear system: kappa from the largest eigenvalue of P, rho from
    // the smallest level set of V touching a face of A^-1 B.
    const Box b2 = cube(2, -1, 1);
    const std::string l2 = c.bundle("linear_2d", linear_2d(), b2);
    const Matrix P = linear_2d_P();
    Matrix A(2, 2);
    A << 0.9, 0.2, 0.0, 0.8;
    const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(P).eigenvalues().maxCoeff();
    const Matrix Pinv = P.inverse();
    double rho = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2; ++i) {
      const Vector a = A.row(i).transpose();
      rho = std::min(rho, 1.0 / a.dot(Pinv * a));
    }
    LevelParams q;
    q.kappa = std::stod(num(0.5 / lmax));
    q.rho = std::stod(num(0.9 * rho));
    c.certify_case("lyap-2d", l2, "lyap-discrete", build_discrete_lyapunov(linear_2d(), b2, q),
                   {"--kappa", num(q.kappa), "--rho", num(q.rho)});

    LevelParams s;
    s.c1 = 0.01;
    s.c2 = 0.81;
    s.kappa = 1.0;
    const std::vector<std::string> shell = {"--c1", "0.01", "--c2", "0.81", "--kappa", "1"};
    const std::string cs = c.bundle("continuous_scalar", continuous_scalar(1.0), b1);
    c.certify_case("continuous", cs, "lyap-continuous", build_continuous_lyapunov(continuous_scalar(1.0), b1, s), shell);
    const std::string cf = c.bundle("continuous_flipped", continuous_scalar(-1.0), b1);
    c.certify_case("continuous-flipped", cf, "lyap-continuous",
                   build_continuous_lyapunov(continuous_scalar(-1.0), b1, s), shell);

    LevelParams k;
    k.rho = 1.0;
    k.epsilon = 0.1;
    k.rate = 0.6;
    c.certify_case("contraction-0.6", sl, "contraction", build_contraction(scalar_linear(), b1, k),
                   {"--rate", "0.6", "--epsilon", "0.1", "--rho", "1"});
    k.rate = 0.4;
    c.certify_case("contraction-0.4", sl, "contraction", build_contraction(scalar_linear(), b1, k),
                   {"--rate", "0.4", "--epsilon", "0.1", "--rho", "1"});

    const Box bd = interval(-1.5, 1.5);
    const std::string bb = c.bundle("barrier_scalar", barrier_scalar(), bd);
    const std::vector<Vector> verts = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
    const std::string vp = c.vertices("barrier", verts);
    LevelParams h;
    c.certify_case("barrier", bb, "barrier", build_barrier(barrier_scalar(), bd, h, verts), {"--vertices", vp});

    const Box wb = interval(-0.5, 0.5);
    LevelParams r;
    r.rho = 1.0;
    r.kappa = 0.5;
    r.nu = 0.25;
    const std::vector<std::string> robust = {"--rho", "1", "--kappa", "0.5", "--nu", "0.25"};
    const std::string r1 = c.bundle("robust_w2", robust_scalar(1.0), b1, wb);
    c.certify_case("robust-w2", r1, "robust-roa", build_robust_roa(robust_scalar(1.0), b1, wb, r), robust);
    const std::string r4 = c.bundle("robust_4w2", robust_scalar(4.0), b1, wb);
    c.certify_case("robust-4w2", r4, "robust-roa", build_robust_roa(robust_scalar(4.0), b1, wb, r), robust);

    // g is linear, so iterating it on the box endpoints gives the exact tube.
    const Graph g = closed_loop(scalar_linear());
    double lo = -1.0;
    double hi = 1.0;
    json tl = json::array();
    json th = json::array();
    for (int step = 0; step < 3; ++step) {
      const double a = evaluate(g, Vector::Constant(1, lo))[0];
      const double b = evaluate(g, Vector::Constant(1, hi))[0];
      lo = std::min(a, b);
      hi = std::max(a, b);
      tl.push_back({lo});
      th.push_back({hi});
    }
    c.add("certify-reach-scalar", {"certify", "--kind", "reach", "--system", sl, "--steps", "3"},
          {{"exit", kOk}, {"status", "bounded"}, {"tube", {{"lower", tl}, {"upper", th}, {"tol", 1e-12}}}},
          {{"kind", "closed-form"}, {"rule", "monotone linear map applied to the box endpoints"}});
    c.bundle("residual_net", residual_net(3), b1);
  }

  // Optimization.
  {
    const Graph sg = sin_graph();
    const std::string sp = "graphs/sin_lower.graph";
    c.optimize_case("sin", sp, sg, Vector::Ones(1), interval(0, 2 * kPi), false, nullptr, "");
    c.optimize_case("sin", sp, sg, Vector::Ones(1), interval(0, kPi), true, nullptr, "");
    const Graph mg = mpc_graph();
    const std::string mp = c.graph("mpc", mg);
    const Box mb = interval(-3, 3);
    SpecCNF cons;
    cons.input_box = mb;
    cons.clauses = {{{make_atom((Vector(2) << 1.0, 0.0).finished(), -2.0, Sense::Less)}}};
    const std::string cp = c.spec("mpc_constraints", cons);
    c.optimize_case("mpc", mp, mg, (Vector(2) << 1.0, 0.5).finished(), mb, false, &cons, cp);
  }

  // Branching comparison: same instance, both split rules, no falsifier.
  const Box bx((Vector(2) << -1.0, -10.0).finished(), (Vector(2) << 1.0, 10.0).finished());
  const Graph brg = branching_graph();
  c.verify_case("branching", brg, threshold_spec(bx, 0.3));
  json branch;
  for (const char* rule : {"naive", "smart"}) {
    branch[rule] = {"verify", "--graph", "graphs/branching.graph", "--spec", "specs/branching.spec", "--branching",
                    rule, "--no-falsify"};
  }
  branch["max_ratio"] = 1.0;
  c.finish(std::move(branch));
}

}  // namespace boxcert::cli
