#include "boxcert/bab.hpp"
#include "boxcert/fixtures.hpp"
#include "boxcert/graph_builder.hpp"
#include "boxcert/graph_io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

using namespace boxcert;

namespace {

const std::filesystem::path kFixtures(BOXCERT_FIXTURE_DIR);

Box interval(double l, double u) { return Box(Vector::Constant(1, l), Vector::Constant(1, u)); }

Box branching_box() { return Box((Vector(2) << -1, -10).finished(), (Vector(2) << 1, 10).finished()); }

struct Instance {
  std::string name;
  Graph graph;
  SpecCNF spec;
};

std::vector<Instance> verified_instances() {
  std::vector<Instance> out;
  out.push_back({"sin", fixtures::sin_graph(), fixtures::threshold_spec(interval(0, 2 * std::numbers::pi), -1.5)});
  out.push_back({"branching", fixtures::branching_graph(), fixtures::threshold_spec(branching_box(), 0.3)});
  for (const char* name : {"lyap", "tanh_net"}) {
    out.push_back({name, load_graph(kFixtures / "graphs" / (std::string(name) + ".graph")),
                   load_spec(kFixtures / "specs" / (std::string(name) + ".spec"))});
  }
  return out;
}

}  // namespace

TEST(Split, NaiveTakesLongestEdge) {
  const Box box(Vector::Zero(2), (Vector(2) << 4, 1).finished());
  EXPECT_EQ(split_dimension(box, Vector::Zero(2), Branching::Naive), 0);
  const auto [a, b] = split(box, Vector::Zero(2), Branching::Naive);
  EXPECT_EQ(a.upper[0], 2.0);
  EXPECT_EQ(b.lower[0], 2.0);
  EXPECT_EQ(a.upper[1], 1.0);
}

TEST(Split, SmartWeighsCoefficientsByWidth) {
  const Box unit(Vector::Zero(2), Vector::Ones(2));
  EXPECT_EQ(split_dimension(unit, (Vector(2) << 0.1, 5).finished(), Branching::Smart), 1);
  EXPECT_EQ(split_dimension(unit, (Vector(2) << -5, 0.1).finished(), Branching::Smart), 0);
  // |a0| w0 = |a1| w1.
  const Box wide(Vector::Zero(2), (Vector(2) << 2, 1).finished());
  EXPECT_EQ(split_dimension(wide, (Vector(2) << 1, 2).finished(), Branching::Smart), 0);
  // All scores zero: longest edge.
  EXPECT_EQ(split_dimension(Box(Vector::Zero(2), (Vector(2) << 1, 3).finished()), Vector::Zero(2), Branching::Smart), 1);
}

TEST(Split, ZeroWidthBoxThrows) {
  EXPECT_THROW(split_dimension(interval(1, 1), Vector::Ones(1), Branching::Naive), GraphError);
}

TEST(SplitProperty, ChildrenPartitionAndHalve) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    Box box = oracle::random_box(3, 2.0, 3.0, rng);
    if (box.max_width() == 0.0) continue;
    const Vector a = Vector::NullaryExpr(3, [&] { return n(rng); });
    for (Branching s : {Branching::Naive, Branching::Smart}) {
      const int d = split_dimension(box, a, s);
      const auto [lo, hi] = split(box, a, s);
      EXPECT_EQ(lo.upper[d], hi.lower[d]);
      EXPECT_EQ(lo.lower[d], box.lower[d]);
      EXPECT_EQ(hi.upper[d], box.upper[d]);
      EXPECT_NEAR(lo.volume(box) + hi.volume(box), box.volume(box), 1e-12 * box.volume(box));
      EXPECT_NEAR(lo.width()[d], box.width()[d] / 2, 1e-15 * std::max(1.0, box.width()[d]));
    }
  }
}

TEST(ClauseBound, SquareAwayFromTheWell) {
  const Graph g = fixtures::square_minus_one();
  const Clause c{{Atom{Vector::Ones(1), 0.0}}};
  const double lb = clause_lower_bound(g, c, interval(1.1, 2), {});
  EXPECT_GT(lb, 0.0);
  EXPECT_LE(lb, 1.1 * 1.1 - 1 + 1e-12);
  EXPECT_LE(clause_lower_bound(g, c, interval(-2, 2), {}), 0.0);
}

TEST(ClauseBound, LooseThresholdCertifiesAtRoot) {
  const Box box(Vector::Constant(2, -1), Vector::Constant(2, 1));
  const Clause c{{Atom{Vector::Ones(1), 10.0}}};
  EXPECT_GT(clause_lower_bound(fixtures::tanh_net(1), c, box, {}), 0.0);
  VerifyConfig cfg;
  const VerifyResult r = verify(fixtures::tanh_net(1), SpecCNF{{c}, box}, cfg);
  EXPECT_EQ(r.status, VerifyStatus::Verified);
  EXPECT_EQ(r.stats.domains, 1);
}

TEST(ClauseBound, MaxOverAtoms) {
  const Graph g = fixtures::square_minus_one();
  const Box box = interval(-2, 2);
  const Atom weak{Vector::Ones(1), 0.0};
  const Atom strong{Vector::Ones(1), 5.0};
  const ClauseBound cb = bound_clause(g, Clause{{weak, strong}}, box, {});
  EXPECT_EQ(cb.atom, 1);
  EXPECT_EQ(cb.value, clause_lower_bound(g, Clause{{strong}}, box, {}));
}

TEST(Verify, SineAboveMinusOneAndAHalf) {
  const Graph g = fixtures::sin_graph();
  const VerifyResult r = verify(g, fixtures::threshold_spec(interval(0, 2 * std::numbers::pi), -1.5), {});
  EXPECT_EQ(r.status, VerifyStatus::Verified);
}

TEST(Verify, SquareIsFalsified) {
  const Graph g = fixtures::square_minus_one();
  const SpecCNF s = fixtures::threshold_spec(interval(-2, 2), 0.0);
  const VerifyResult r = verify(g, s, {});
  ASSERT_EQ(r.status, VerifyStatus::Falsified);
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_LT(std::abs(r.counterexample->x[0]), 1.0);
  EXPECT_FALSE(check_point(s, g, r.counterexample->x).satisfied);
}

TEST(Verify, FalseSpecIsNeverVerifiedWithoutSearch) {
  VerifyConfig cfg;
  cfg.max_domains = 5000;
  const Graph g = fixtures::square_minus_one();
  const SpecCNF s = fixtures::threshold_spec(interval(-2, 2), 0.0);
  cfg.falsify = false;
  const VerifyResult r = verify(g, s, cfg);
  EXPECT_NE(r.status, VerifyStatus::Verified);
}

TEST(Verify, LyapunovFixture) {
  const Graph g = load_graph(kFixtures / "graphs" / "lyap.graph");
  const SpecCNF s = load_spec(kFixtures / "specs" / "lyap.spec");
  EXPECT_EQ(verify(g, s, {}).status, VerifyStatus::Verified);
}

TEST(Verify, BudgetExhaustionIsUnknown) {
  VerifyConfig cfg;
  cfg.max_domains = 3;
  cfg.falsify = false;
  const VerifyResult r = verify(fixtures::branching_graph(), fixtures::threshold_spec(branching_box(), 0.3), cfg);
  EXPECT_EQ(r.status, VerifyStatus::Unknown);
  EXPECT_FALSE(r.counterexample.has_value());
}

TEST(Verify, BoundaryTouchIsNotVerified) {
  // min of x^2 on [-1, 1] is exactly 0; strict y > 0 fails only at x = 0.
  GraphBuilder b("sq");
  const Graph g = b.build(b.unary(OpKind::Square, b.input("x", 1)));
  VerifyConfig cfg;
  cfg.max_domains = 2000;
  const VerifyResult r = verify(g, fixtures::threshold_spec(interval(-1, 1), 0.0), cfg);
  EXPECT_NE(r.status, VerifyStatus::Verified);
}

TEST(VerifyProperty, PartitionVolumeIsConserved) {
  for (Branching br : {Branching::Naive, Branching::Smart}) {
    VerifyConfig cfg;
    cfg.branching = br;
    cfg.falsify = false;
    cfg.batch = 4;
    int calls = 0;
    const VerifyResult r = verify(fixtures::branching_graph(), fixtures::threshold_spec(branching_box(), 0.3), cfg,
                                  [&](const BabSnapshot& s) {
                                    ++calls;
                                    EXPECT_NEAR(s.certified_volume + s.open_volume, s.root_volume,
                                                1e-9 * s.root_volume);
                                    for (const Subdomain& d : *s.stack) {
                                      EXPECT_TRUE(branching_box().contains(d.box));
                                    }
                                  });
    EXPECT_EQ(r.status, VerifyStatus::Verified);
    EXPECT_GT(calls, 1);
  }
}

TEST(VerifyProperty, VerifiedAgreesWithDenseOracle) {
  for (const Instance& in : verified_instances()) {
    const VerifyResult r = verify(in.graph, in.spec, {});
    ASSERT_EQ(r.status, VerifyStatus::Verified) << in.name;
    const int res = in.graph.input_dim() == 1 ? 90001 : 301;
    const OracleResult o = grid_oracle(in.graph, in.spec, in.spec.input_box, res, 10000, 13);
    EXPECT_GE(o.evaluations, 100000);
    EXPECT_FALSE(o.violated) << in.name;
  }
}

TEST(VerifyProperty, WorkerCountDoesNotChangeStatus) {
  std::vector<Instance> all = verified_instances();
  all.push_back({"square", fixtures::square_minus_one(), fixtures::threshold_spec(interval(-2, 2), 0.0)});
  for (const Instance& in : all) {
    VerifyConfig one;
    VerifyConfig four;
    four.workers = 4;
    const VerifyResult a = verify(in.graph, in.spec, one);
    const VerifyResult b = verify(in.graph, in.spec, four);
    EXPECT_EQ(a.status, b.status) << in.name;
    if (b.counterexample) EXPECT_FALSE(check_point(in.spec, in.graph, b.counterexample->x).satisfied);
  }
}

TEST(VerifyProperty, SmartNeedsNoMoreDomainsThanNaive) {
  VerifyConfig naive;
  naive.branching = Branching::Naive;
  naive.falsify = false;
  VerifyConfig smart = naive;
  smart.branching = Branching::Smart;
  const SpecCNF s = fixtures::threshold_spec(branching_box(), 0.3);
  const VerifyResult a = verify(fixtures::branching_graph(), s, naive);
  const VerifyResult b = verify(fixtures::branching_graph(), s, smart);
  ASSERT_EQ(a.status, VerifyStatus::Verified);
  ASSERT_EQ(b.status, VerifyStatus::Verified);
  EXPECT_LE(b.stats.domains, a.stats.domains);
}
