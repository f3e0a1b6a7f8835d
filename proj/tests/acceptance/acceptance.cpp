// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include "boxcert/bab.hpp"
#include "boxcert/boundprop.hpp"
#include "boxcert/cli.hpp"
#include "boxcert/control.hpp"
#include "boxcert/fixtures.hpp"
#include "boxcert/graph_builder.hpp"
#include "boxcert/graph_io.hpp"
#include "boxcert/jacobian.hpp"
#include "boxcert/optimize.hpp"
#include "json.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace boxcert;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const fs::path kFixtures(BOXCERT_FIXTURE_DIR);
const fs::path kGolden(BOXCERT_GOLDEN_DIR);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class F>
double timed(F&& f) {
  const auto t0 = Clock::now();
  f();
  return seconds_since(t0);
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Box interval(double l, double u) { return Box(Vector::Constant(1, l), Vector::Constant(1, u)); }
Box sym(int n, double r) { return Box(Vector::Constant(n, -r), Vector::Constant(n, r)); }

Vector join(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1
void relaxation_sweep(Verdict& v) {
  const std::vector<OpKind> kinds = {OpKind::Constant, OpKind::Affine, OpKind::Add,   OpKind::Sub,     OpKind::Neg,
                                     OpKind::Mul,      OpKind::Scale,  OpKind::ReLU,  OpKind::Tanh,    OpKind::Sigmoid,
                                     OpKind::Sin,      OpKind::Cos,    OpKind::Square, OpKind::Concat, OpKind::Slice,
                                     OpKind::SumReduce, OpKind::Heaviside};
  long samples = 0;
  long violations = 0;
  double worst = 0.0;
  const double t = timed([&] {
    for (size_t k = 0; k < kinds.size(); ++k) {
      const oracle::SweepResult r =
          oracle::relaxation_sweep(oracle::op_harness(kinds[k], k + 1), 200, 10000, 4.0, 8.0, 1e-9, 100 + k);
      samples += r.samples;
      violations += r.violations;
      worst = std::max(worst, r.worst);
    }
    // Mul with both slots on one parent is relaxed as a square.
    const oracle::SweepResult r = oracle::relaxation_sweep(oracle::mul_self_harness(), 200, 10000, 4.0, 8.0, 1e-9, 99);
    samples += r.samples;
    violations += r.violations;
    worst = std::max(worst, r.worst);
  });
  v.detail << kinds.size() << " kinds, " << samples << " samples, " << violations << " violations, worst overshoot "
           << fmt(worst) << ", " << fmt(t) << " s";
  v.require(violations == 0, "violations");
  v.require(t < 60.0, "runtime");
}

// 2
void toy_graph(Verdict& v) {
  ScalarBounds b;
  const double t = timed([&] { b = output_bounds(fixtures::toy_graph(), interval(-1, 1), {}, BoundMode::CROWN).bounds; });
  v.detail << "[" << b.lower[0] << ", " << b.upper[0] << "], " << fmt(t) << " s";
  v.require(std::abs(b.lower[0] - 3.0) <= 1e-9 && std::abs(b.upper[0] - 4.0) <= 1e-9, "bounds");
  v.require(t < 1.0, "runtime");
}

// 3
void affine_exactness(Verdict& v) {
  std::mt19937_64 rng(3);
  const std::vector<OpKind> linear = {OpKind::Affine, OpKind::Scale, OpKind::Neg,    OpKind::Add,
                                      OpKind::Sub,    OpKind::Concat, OpKind::Slice, OpKind::SumReduce};
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const int in = 1 + s % 3;
    const Graph g = random_graph(1000 + s, 1 + s % 4, 5, linear, in, 1 + s % 2);
    const Box box = oracle::random_box(in, 2.0, 4.0, rng);
    const ScalarBounds b = output_bounds(g, box, {}, BoundMode::CROWN).bounds;
    const auto [lo, hi] = oracle::vertex_extremes(g, box);
    for (int i = 0; i < lo.size(); ++i) {
      const double scale = std::max(1.0, std::max(std::abs(lo[i]), std::abs(hi[i])));
      worst = std::max(worst, std::abs(b.lower[i] - lo[i]) / scale);
      worst = std::max(worst, std::abs(b.upper[i] - hi[i]) / scale);
    }
  }
  v.detail << "50 graphs, worst deviation from vertex extremes " << fmt(worst);
  v.require(worst <= 1e-9, "deviation");
}

// 4
void crown_dominates_ibp(Verdict& v) {
  std::mt19937_64 rng(4);
  int subset = 0;
  double ibp_width = 0.0;
  double crown_width = 0.0;
  for (int s = 0; s < 50; ++s) {
    const std::vector<OpKind> ops = s % 2 == 0 ? std::vector<OpKind>{OpKind::ReLU} : std::vector<OpKind>{OpKind::Tanh};
    const Graph g = random_graph(2000 + s, 2 + s % 3, 8, ops, 2, 1);
    const Box box = oracle::random_box(2, 1.0, 2.0, rng);
    const ScalarBounds ibp = output_bounds(g, box, {}, BoundMode::IBP).bounds;
    const ScalarBounds crown = output_bounds(g, box, {}, BoundMode::CROWN).bounds;
    subset += crown.subset_of(ibp, 1e-9);
    ibp_width += (ibp.upper - ibp.lower).sum();
    crown_width += (crown.upper - crown.lower).sum();
  }
  v.detail << subset << "/50 subsets, total width CROWN " << fmt(crown_width) << " vs IBP " << fmt(ibp_width);
  v.require(subset == 50, "subset");
}

// 5
void verifier_vs_oracle(Verdict& v) {
  int resolved = 0;
  int verified = 0;
  int falsified = 0;
  int unsound = 0;
  int oracle_false = 0;
  const std::vector<std::vector<OpKind>> families = {
      {OpKind::ReLU}, {OpKind::Tanh}, {OpKind::Sin, OpKind::Tanh}, {OpKind::Sigmoid, OpKind::Square}};
  const std::vector<double> offsets = {-0.2, -0.03, 0.03, 0.2};
  std::mt19937_64 rng(5);
  for (int s = 0; s < 40; ++s) {
    const int dim = 1 + s % 2;
    const Graph g = random_graph(3000 + s, 2, 6, families[s % families.size()], dim, 1);
    const Box box = sym(dim, 1.0 + 0.5 * (s % 3));
    const int res = dim == 1 ? 20001 : 401;
    const double lo = grid_min(g, Vector::Ones(1), box, res).min_value;
    SpecCNF spec = fixtures::threshold_spec(box, lo + offsets[(s / 2) % offsets.size()]);
    if (s % 5 == 4) {
      // Two-sided: lo + off < y < hi + 1.
      const double hi = -grid_min(g, -Vector::Ones(1), box, res).min_value;
      spec.clauses.push_back(Clause{{make_atom(Vector::Ones(1), -(hi + 1.0), Sense::Less)}});
    }
    const OracleResult truth = grid_oracle(g, spec, box, res);
    oracle_false += truth.violated;
    VerifyConfig cfg;
    cfg.timeout = 30.0;
    const VerifyResult r = verify(g, spec, cfg);
    if (r.status == VerifyStatus::Verified) {
      ++verified;
      if (truth.violated) ++unsound;
    }
    if (r.status == VerifyStatus::Falsified) {
      ++falsified;
      if (!r.counterexample || check_point(spec, g, r.counterexample->x).satisfied) ++unsound;
    }
    resolved += r.status != VerifyStatus::Unknown;
  }
  v.detail << "40 specs (" << oracle_false << " false per grid), verified " << verified << ", falsified " << falsified
           << ", resolved " << resolved << ", unsound " << unsound;
  v.require(unsound == 0, "soundness");
  v.require(resolved >= 30, "resolved");
}

// 6
void branching_efficacy(Verdict& v) {
  const Graph g = fixtures::branching_graph();
  const SpecCNF s = load_spec(kFixtures / "specs" / "branching.spec");
  const double root = clause_lower_bound(g, s.clauses[0], s.input_box, {});
  VerifyConfig naive;
  naive.falsify = false;
  naive.branching = Branching::Naive;
  VerifyConfig smart = naive;
  smart.branching = Branching::Smart;
  const VerifyResult a = verify(g, s, naive);
  const VerifyResult b = verify(g, s, smart);
  const double ratio = static_cast<double>(b.stats.domains) / static_cast<double>(a.stats.domains);
  v.detail << "root bound " << fmt(root) << ", naive " << to_string(a.status) << " in " << a.stats.domains
           << " domains, smart " << to_string(b.status) << " in " << b.stats.domains << ", ratio " << fmt(ratio);
  v.require(root <= 0.0, "resolved at root");
  v.require(a.status == VerifyStatus::Verified && b.status == VerifyStatus::Verified, "status");
  v.require(ratio <= 1.0, "ratio");
}

// 7
void discrete_lyapunov(Verdict& v) {
  const SystemBundle s = fixtures::scalar_linear(0.5);
  LevelParams p;
  p.rho = 1.0;
  p.kappa = 0.5;
  VerifyResult good;
  const double t_good = timed([&] {
    const CertificateProblem prob = build_discrete_lyapunov(s, sym(1, 1), p);
    good = verify(prob.graph, prob.spec, {});
  });
  p.kappa = 0.9;
  const CertificateProblem broken = build_discrete_lyapunov(s, sym(1, 1), p);
  const VerifyResult bad = verify(broken.graph, broken.spec, {});
  bool violates = false;
  if (bad.counterexample) {
    // Condition: (V(g(x)) - (1 - kappa) V(x) <= 0 and g(x) in B) or V(x) >= rho.
    const Vector x = bad.counterexample->x;
    const Vector gx = evaluate(*s.dynamics, x);
    const double V = evaluate(*s.certificate, x)[0];
    const double F = evaluate(*s.certificate, gx)[0] - (1 - p.kappa) * V;
    const bool inside = sym(1, 1).contains(gx);
    violates = !((F <= 0 && inside) || V >= p.rho);
    v.detail << "(a) κ=0.9 counterexample x=" << fmt(x[0]) << " F=" << fmt(F) << "; ";
  }

  // (b): kappa from P; rho keeps A x inside the box on {V < rho}, since
  // max of a^T x over x^T P x <= rho is sqrt(rho a^T P^-1 a).
  const SystemBundle s2 = fixtures::linear_2d();
  const Matrix P = fixtures::linear_2d_P();
  const Matrix Pinv = P.inverse();
  const Matrix A = (Matrix(2, 2) << 0.9, 0.2, 0.0, 0.8).finished();
  LevelParams p2;
  p2.kappa = 0.5 / Eigen::SelfAdjointEigenSolver<Matrix>(P).eigenvalues().maxCoeff();
  p2.rho = 0.9 / std::max(A.row(0).dot(Pinv * A.row(0).transpose()), A.row(1).dot(Pinv * A.row(1).transpose()));
  VerifyResult planar;
  const double t_planar = timed([&] {
    const CertificateProblem prob = build_discrete_lyapunov(s2, sym(2, 1), p2);
    planar = verify(prob.graph, prob.spec, {});
  });
  v.detail << "(a) κ=0.5 " << to_string(good.status) << " in " << fmt(t_good) << " s, κ=0.9 " << to_string(bad.status)
           << "; (b) " << to_string(planar.status) << " in " << fmt(t_planar) << " s (" << planar.stats.domains
           << " domains)";
  v.require(good.status == VerifyStatus::Verified && t_good < 5.0, "(a) verified");
  v.require(bad.status == VerifyStatus::Falsified && violates, "(a) broken falsified");
  v.require(planar.status == VerifyStatus::Verified && t_planar < 60.0, "(b) verified");
}

// 8
void continuous_lyapunov(Verdict& v) {
  LevelParams p;
  p.c1 = 0.01;
  p.c2 = 0.81;
  p.kappa = 1.0;
  VerifyResult good;
  size_t clauses = 0;
  const double t = timed([&] {
    const CertificateProblem prob = build_continuous_lyapunov(fixtures::continuous_scalar(1.0), sym(1, 1), p);
    clauses = prob.spec.clauses.size();
    good = verify(prob.graph, prob.spec, {});
  });
  const CertificateProblem flipped = build_continuous_lyapunov(fixtures::continuous_scalar(-1.0), sym(1, 1), p);
  const VerifyResult bad = verify(flipped.graph, flipped.spec, {});
  v.detail << "stable " << to_string(good.status) << " over " << clauses << " clauses in " << fmt(t) << " s, flipped "
           << to_string(bad.status);
  v.require(clauses == 3, "shell clause plus both face clauses");
  v.require(good.status == VerifyStatus::Verified && t < 30.0, "stable verified");
  v.require(bad.status == VerifyStatus::Falsified, "flipped falsified");
}

// 9
void contraction_and_barrier(Verdict& v) {
  LevelParams p;
  p.rho = 1.0;
  p.epsilon = 0.1;
  p.rate = 0.6;
  const CertificateProblem c6 = build_contraction(fixtures::scalar_linear(0.5), sym(1, 1), p);
  p.rate = 0.4;
  const CertificateProblem c4 = build_contraction(fixtures::scalar_linear(0.5), sym(1, 1), p);
  const VerifyStatus s6 = verify(c6.graph, c6.spec, {}).status;
  const VerifyStatus s4 = verify(c4.graph, c4.spec, {}).status;
  VerifyStatus sb = VerifyStatus::Unknown;
  const double t = timed([&] {
    const CertificateProblem b =
        build_barrier(fixtures::barrier_scalar(), sym(1, 1.5), LevelParams{}, {Vector::Constant(1, -1), Vector::Constant(1, 1)});
    sb = verify(b.graph, b.spec, {}).status;
  });
  v.detail << "contraction 0.6 " << to_string(s6) << ", 0.4 " << to_string(s4) << "; barrier " << to_string(sb) << " in "
           << fmt(t) << " s";
  v.require(s6 == VerifyStatus::Verified, "rate 0.6");
  v.require(s4 == VerifyStatus::Falsified, "rate 0.4");
  v.require(sb == VerifyStatus::Verified && t < 10.0, "barrier");
}

// 10
void reachability(Verdict& v) {
  const ReachTube t = reach_tube(fixtures::scalar_linear(0.5), sym(1, 1), 3);
  bool exact = t.steps.size() == 3 && !t.diverged;
  for (size_t k = 0; exact && k < 3; ++k) {
    const double r = std::pow(0.5, static_cast<double>(k + 1));
    exact = t.steps[k].lower[0] == -r && t.steps[k].upper[0] == r;
  }
  const SystemBundle net = fixtures::residual_net();
  const ReachTube tube = reach_tube(net, sym(1, 1), 5);
  std::mt19937_64 rng(10);
  long escapes = 0;
  for (int k = 0; k < 1000; ++k) {
    Vector x = oracle::sample_point(sym(1, 1), rng);
    for (const auto& sb : tube.steps) {
      x = evaluate(*net.dynamics, x);
      escapes += !sb.contains(x);
    }
  }
  v.detail << "scalar tube " << (exact ? "exact" : "inexact") << ", residual-net tube over " << tube.steps.size()
           << " steps, " << escapes << " escapes in 1000 trajectories";
  v.require(exact, "scalar tube");
  v.require(!tube.diverged && escapes == 0, "residual tube");
}

// 11
void optimizer(Verdict& v) {
  OptConfig cfg;
  cfg.record_pruned = true;
  OptResult r;
  const Graph sine = fixtures::sin_graph();
  const Box box = interval(0, 2 * std::numbers::pi);
  const double t = timed([&] { r = minimize(sine, Vector::Ones(1), box, nullptr, cfg); });
  std::mt19937_64 rng(11);
  long below = 0;
  for (int k = 0; k < 100000; ++k) below += std::sin(oracle::sample_point(box, rng)[0]) < r.certified_bound - 1e-7;
  for (const Box& b : r.pruned) {
    for (int k = 0; k < 1000; ++k) below += std::sin(oracle::sample_point(b, rng)[0]) < r.primal_value - 1e-7;
  }

  const Graph mpc = load_graph(kFixtures / "graphs" / "mpc.graph");
  const SpecCNF c = load_spec(kFixtures / "specs" / "mpc_constraints.spec");
  const Vector obj = (Vector(2) << 1, 0.5).finished();
  const OptResult m = minimize(mpc, obj, interval(-3, 3), &c, cfg);
  const double grid = grid_min(mpc, obj, interval(-3, 3), 100001, &c).min_value;
  for (const Box& b : m.pruned) {
    for (int k = 0; k < 1000; ++k) {
      const Vector y = evaluate(mpc, oracle::sample_point(b, rng));
      below += check_output(c, y).satisfied && obj.dot(y) < m.primal_value - 1e-7;
    }
  }
  v.detail << "sin: primal " << fmt(r.primal_value) << " gap " << fmt(r.gap) << " in " << fmt(t) << " s, "
           << r.pruned.size() + m.pruned.size() << " pruned boxes, " << below << " sampled points below the bounds; mpc "
           << m.primal_value << " vs grid " << grid;
  v.require(r.gap <= 1e-3 && std::abs(r.primal_value + 1.0) <= 1e-3 && t < 10.0, "sin");
  v.require(below == 0 && !m.pruned.empty(), "prune safety");
  v.require(std::abs(m.primal_value - grid) <= 1e-3, "mpc");
}

// 12
void jacobian(Verdict& v) {
  std::vector<std::pair<std::string, Graph>> smooth = {
      {"sin", fixtures::sin_graph()},
      {"tanh_net", fixtures::tanh_net(1)},
      {"sigmoid_net", fixtures::sigmoid_net(3)},
      {"branching", fixtures::branching_graph()},
      {"mpc_cost", [] {
         GraphBuilder b("mpc_cost");
         const std::string u = b.input("u", 1);
         return b.build(b.affine({b.inline_graph(fixtures::mpc_graph(), {u}, "m")}, (Matrix(1, 2) << 1, 0.5).finished()));
       }()},
      {"V_2d", *fixtures::linear_2d().certificate},
      {"continuous_f", *fixtures::continuous_scalar().dynamics}};
  std::mt19937_64 rng(12);
  double worst = 0.0;
  long outside = 0;
  long checked = 0;
  for (const auto& [name, g] : smooth) {
    const AugmentedGraph ag = augment_with_jacobian(g);
    const int n = g.input_dim();
    const int lo = ag.grad_slice.first;
    for (int k = 0; k < 100; ++k) {
      const Vector x = oracle::sample_point(sym(n, 2.0), rng);
      const Vector fd = oracle::finite_difference(g, x);
      const Vector grad = evaluate(ag.graph, x).segment(lo, n);
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(grad[i] - fd[i]) / std::max(1.0, std::abs(fd[i])));
    }
    for (int b = 0; b < 10; ++b) {
      const Box box = oracle::random_box(n, 1.5, 1.0, rng);
      const ScalarBounds sb = output_bounds(ag.graph, box, {}, BoundMode::CROWN).bounds;
      for (int k = 0; k < 1000; ++k) {
        const Vector grad = point_gradient(g, oracle::sample_point(box, rng));
        for (int i = 0; i < n; ++i) {
          outside += grad[i] < sb.lower[lo + i] - 1e-6 || grad[i] > sb.upper[lo + i] + 1e-6;
          ++checked;
        }
      }
    }
  }
  v.detail << smooth.size() << " fixtures, worst relative FD error " << fmt(worst) << ", " << outside << "/" << checked
           << " sampled gradients outside bounds";
  v.require(worst <= 1e-5, "finite differences");
  v.require(outside == 0, "gradient bounds");
}

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str()};
}

std::string read_file(const fs::path& p) { return read_text_file(p); }

// 13
void determinism(Verdict& v) {
  auto fx = [](const std::string& rel) { return (kFixtures / rel).string(); };
  const std::vector<std::pair<std::string, std::vector<std::string>>> golden = {
      {"verify_lyap.json", {"verify", "--graph", fx("graphs/lyap.graph"), "--spec", fx("specs/lyap.spec"), "--timeout", "30"}},
      {"verify_lyap_broken.json", {"verify", "--graph", fx("graphs/lyap_broken.graph"), "--spec", fx("specs/lyap_broken.spec")}},
      {"minimize_sin.json",
       {"minimize", "--graph", fx("graphs/sin_lower.graph"), "--objective", "1", "--box", "0 6.283185307179586"}}};
  int identical = 0;
  for (const auto& [file, args] : golden) {
    const CliRun a = run_cli(args);
    const CliRun b = run_cli(args);
    identical += a.out == b.out && a.out == read_file(kGolden / file);
  }

  const json manifest = json::parse(read_file(kFixtures / "manifest.json"));
  int agree = 0;
  int cases = 0;
  for (const json& c : manifest["cases"]) {
    std::vector<std::string> args;
    const std::vector<std::string> file_flags = {"--graph", "--spec", "--system", "--constraints", "--vertices"};
    bool take_path = false;
    for (const json& a : c["args"]) {
      const std::string s = a.get<std::string>();
      args.push_back(take_path ? fx(s) : s);
      take_path = std::find(file_flags.begin(), file_flags.end(), s) != file_flags.end();
    }
    if (args.front() == "bounds") continue;
    std::vector<std::string> one = args;
    one.insert(one.end(), {"--workers", "1"});
    std::vector<std::string> four = args;
    four.insert(four.end(), {"--workers", "4"});
    const CliRun a = run_cli(one);
    const CliRun b = run_cli(four);
    ++cases;
    const bool same = a.code == b.code && json::parse(a.out)["status"] == json::parse(b.out)["status"];
    agree += same;
    if (!same) v.detail << " [" << c["name"].get<std::string>() << " differs]";
  }
  v.detail << identical << "/" << golden.size() << " golden documents byte-identical, " << agree << "/" << cases
           << " corpus cases agree between 1 and 4 workers";
  v.require(identical == static_cast<int>(golden.size()), "golden");
  v.require(agree == cases, "worker agreement");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"relaxation soundness sweep", relaxation_sweep},
      {"toy graph exactness", toy_graph},
      {"affine exactness", affine_exactness},
      {"CROWN inside IBP", crown_dominates_ibp},
      {"verifier vs grid oracle", verifier_vs_oracle},
      {"smart vs naive branching", branching_efficacy},
      {"discrete Lyapunov", discrete_lyapunov},
      {"continuous Lyapunov", continuous_lyapunov},
      {"contraction and barrier", contraction_and_barrier},
      {"reachability tube", reachability},
      {"optimizer", optimizer},
      {"jacobian", jacobian},
      {"determinism", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << v.detail.str()
              << " (" << fmt(seconds_since(t0)) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<size_t>(failed)) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed;
}
