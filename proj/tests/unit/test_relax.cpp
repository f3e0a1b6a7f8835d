#include "boxcert/fixtures.hpp"
#include "boxcert/graph_builder.hpp"
#include "boxcert/relax.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace boxcert;

namespace {

constexpr double kPi = std::numbers::pi;

IntervalVector iv(double l, double u) { return {Vector::Constant(1, l), Vector::Constant(1, u)}; }

double lo_slope(const LinearRelaxation& r, int slot = 0) { return r.lower[static_cast<size_t>(slot)].to_dense()(0, 0); }
double up_slope(const LinearRelaxation& r, int slot = 0) { return r.upper[static_cast<size_t>(slot)].to_dense()(0, 0); }

const std::vector<OpKind> kAllKinds = {OpKind::Constant, OpKind::Affine, OpKind::Add,       OpKind::Sub,
                                       OpKind::Neg,      OpKind::Mul,    OpKind::Scale,     OpKind::ReLU,
                                       OpKind::Tanh,     OpKind::Sigmoid, OpKind::Sin,      OpKind::Cos,
                                       OpKind::Square,   OpKind::Concat, OpKind::Slice,     OpKind::SumReduce,
                                       OpKind::Heaviside};

}  // namespace

TEST(RelaxRelu, UnstableWithZeroSlope) {
  const double l = -1.0;
  const double u = 2.0;
  const Vector alpha = Vector::Zero(1);
  const LinearRelaxation r = relax_relu(iv(l, u), &alpha);
  EXPECT_EQ(lo_slope(r), 0.0);
  EXPECT_EQ(r.lower_bias[0], 0.0);
  // Chord through (l, 0) and (u, u).
  EXPECT_NEAR(up_slope(r), u / (u - l), 1e-15);
  EXPECT_NEAR(r.upper_bias[0], -u * l / (u - l), 1e-15);
  EXPECT_NEAR(up_slope(r), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.upper_bias[0], 2.0 / 3.0, 1e-15);
}

TEST(RelaxRelu, StableCases) {
  const LinearRelaxation on = relax_relu(iv(1, 5));
  EXPECT_EQ(lo_slope(on), 1.0);
  EXPECT_EQ(up_slope(on), 1.0);
  EXPECT_EQ(on.lower_bias[0], 0.0);
  EXPECT_EQ(on.upper_bias[0], 0.0);
  const LinearRelaxation off = relax_relu(iv(-5, -1));
  EXPECT_EQ(lo_slope(off), 0.0);
  EXPECT_EQ(up_slope(off), 0.0);
  EXPECT_EQ(off.upper_bias[0], 0.0);
}

TEST(RelaxRelu, DefaultAlphaPicksTheSteeperSide) {
  EXPECT_EQ(default_relu_alpha(-1.0, 2.0), 1.0);
  EXPECT_EQ(default_relu_alpha(-3.0, 2.0), 0.0);
  EXPECT_EQ(lo_slope(relax_relu(iv(-1, 2))), 1.0);
  EXPECT_EQ(lo_slope(relax_relu(iv(-3, 2))), 0.0);
}

TEST(RelaxRelu, UpperPlaneTouchesBothEndpoints) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.01, 10.0);
  for (int k = 0; k < 200; ++k) {
    const double l = -d(rng);
    const double u = d(rng);
    const LinearRelaxation r = relax_relu(iv(l, u));
    const Line up{up_slope(r), r.upper_bias[0]};
    EXPECT_NEAR(up.at(l), 0.0, 1e-12);
    EXPECT_NEAR(up.at(u), u, 1e-12 * std::max(1.0, u));
  }
}

TEST(RelaxSin, QuarterPeriodSecantBelowTangentAbove) {
  const LinearRelaxation r = relax_sin(iv(0, kPi / 2));
  // Secant through (0, 0) and (pi/2, 1).
  EXPECT_NEAR(lo_slope(r), 2.0 / kPi, 1e-12);
  EXPECT_NEAR(r.lower_bias[0], 0.0, 1e-8);
  // Tangent at the midpoint pi/4.
  const double m = kPi / 4;
  EXPECT_NEAR(up_slope(r), std::cos(m), 1e-12);
  EXPECT_NEAR(r.upper_bias[0], std::sin(m) - m * std::cos(m), 1e-8);
  EXPECT_NEAR(r.upper_bias[0], 0.15175, 1e-5);
}

TEST(RelaxSin, DegenerateIntervalIsExact) {
  const double a = 0.7;
  const LinearRelaxation r = relax_sin(iv(a, a));
  EXPECT_EQ(lo_slope(r), 0.0);
  EXPECT_EQ(up_slope(r), 0.0);
  EXPECT_NEAR(r.lower_bias[0], std::sin(a), 1e-12);
  EXPECT_NEAR(r.upper_bias[0], std::sin(a), 1e-12);
}

TEST(RelaxSin, WideIntervalFallsBackToConstants) {
  const LinearRelaxation r = relax_sin(iv(-3 * kPi, 3 * kPi));
  EXPECT_EQ(lo_slope(r), 0.0);
  EXPECT_EQ(up_slope(r), 0.0);
  EXPECT_NEAR(r.lower_bias[0], -1.0, 1e-8);
  EXPECT_NEAR(r.upper_bias[0], 1.0, 1e-8);
}

TEST(RelaxSin, MixedRegionsAreSound) {
  // Intervals straddling inflection points, after periodic shifts.
  for (double shift : {0.0, 2 * kPi, -4 * kPi}) {
    for (auto [l, u] : {std::pair{-1.0, 2.0}, {2.5, 4.0}, {-3.0, 3.0}, {0.1, 6.2}}) {
      const ScalarRelaxation s = relax_sin_scalar(l + shift, u + shift);
      for (int k = 0; k <= 10000; ++k) {
        const double x = l + shift + (u - l) * k / 10000.0;
        ASSERT_LE(s.lower.at(x), std::sin(x) + 1e-9);
        ASSERT_GE(s.upper.at(x), std::sin(x) - 1e-9);
      }
    }
  }
}

TEST(RelaxCos, MatchesShiftedSine) {
  const LinearRelaxation r = relax_cos(iv(-0.5, 1.0));
  for (int k = 0; k <= 1000; ++k) {
    const double x = -0.5 + 1.5 * k / 1000.0;
    ASSERT_LE(lo_slope(r) * x + r.lower_bias[0], std::cos(x) + 1e-9);
    ASSERT_GE(up_slope(r) * x + r.upper_bias[0], std::cos(x) - 1e-9);
  }
}

TEST(RelaxMul, McCormickPlanes) {
  const LinearRelaxation r = relax_mul(iv(0, 2), iv(1, 3), 1, 1);
  // Lower 1: l_y x + l_x y - l_x l_y with l_x = 0, l_y = 1.
  EXPECT_EQ(lo_slope(r, 0), 1.0);
  EXPECT_EQ(lo_slope(r, 1), 0.0);
  EXPECT_EQ(r.lower_bias[0], 0.0);
  // Upper 1: l_y x + u_x y - u_x l_y.
  EXPECT_EQ(up_slope(r, 0), 1.0);
  EXPECT_EQ(up_slope(r, 1), 2.0);
  EXPECT_EQ(r.upper_bias[0], -2.0);
}

TEST(RelaxMul, SecondChoices) {
  const LinearRelaxation r = relax_mul(iv(0, 2), iv(1, 3), 2, 2);
  // Lower 2: u_y x + u_x y - u_x u_y; upper 2: u_y x + l_x y - l_x u_y.
  EXPECT_EQ(lo_slope(r, 0), 3.0);
  EXPECT_EQ(lo_slope(r, 1), 2.0);
  EXPECT_EQ(r.lower_bias[0], -6.0);
  EXPECT_EQ(up_slope(r, 0), 3.0);
  EXPECT_EQ(up_slope(r, 1), 0.0);
  EXPECT_EQ(r.upper_bias[0], 0.0);
}

TEST(RelaxMul, PointFactorGivesTheExactLine) {
  const double c = 1.25;
  const LinearRelaxation r = relax_mul(iv(c, c), iv(-2, 3));
  for (double y : {-2.0, -0.3, 1.0, 3.0}) {
    const std::vector<Vector> xs = {Vector::Constant(1, c), Vector::Constant(1, y)};
    EXPECT_NEAR(r.lower_at(xs)[0], c * y, 1e-12);
    EXPECT_NEAR(r.upper_at(xs)[0], c * y, 1e-12);
  }
}

TEST(RelaxMul, UnitSquareLowerPlane) {
  const LinearRelaxation r = relax_mul(iv(-1, 1), iv(-1, 1), 1, 1);
  EXPECT_EQ(lo_slope(r, 0), -1.0);
  EXPECT_EQ(lo_slope(r, 1), -1.0);
  EXPECT_EQ(r.lower_bias[0], -1.0);
  double worst = 1.0;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      const double x = -1 + i / 100.0;
      const double y = -1 + j / 100.0;
      worst = std::min(worst, x * y - (-x - y - 1));
    }
  }
  EXPECT_GE(worst, -1e-15);
  EXPECT_LE(worst, 1e-15);  // touches at (1, 1)
}

TEST(RelaxAffine, ExactPlanes) {
  const LinearRelaxation r = relax_affine({Matrix::Constant(1, 1, 2.0)}, Vector::Constant(1, -1.0));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(lo_slope(r), 2.0);
  EXPECT_EQ(up_slope(r), 2.0);
  EXPECT_EQ(r.lower_bias[0], -1.0);
  EXPECT_EQ(r.upper_bias[0], -1.0);
  const LinearRelaxation z = relax_affine({Matrix::Zero(2, 3)}, (Vector(2) << 4, 5).finished());
  EXPECT_EQ(z.lower_at({Vector::Constant(3, 9.0)}), (Vector(2) << 4, 5).finished());
}

TEST(RelaxAffine, AddUsesIdentityBlocks) {
  const oracle::OpHarness h = oracle::op_harness(OpKind::Add);
  PreBox pre(3, IntervalVector(Vector::Constant(3, -1), Vector::Constant(3, 1)));
  const LinearRelaxation r = relax_node(h.graph, h.node, pre, {});
  ASSERT_EQ(r.lower.size(), 3u);
  for (const CoeffBlock& b : r.lower) EXPECT_TRUE(b.to_dense().isIdentity());
  EXPECT_TRUE(r.lower_bias.isZero());
}

TEST(RelaxSshape, TanhConcaveSecant) {
  const LinearRelaxation r = relax_sshape(OpKind::Tanh, iv(1, 2));
  EXPECT_NEAR(lo_slope(r), std::tanh(2.0) - std::tanh(1.0), 1e-12);
  EXPECT_NEAR(lo_slope(r), 0.202434, 1e-6);
}

TEST(RelaxSshape, PointIntervalIsExact) {
  for (OpKind k : {OpKind::Tanh, OpKind::Sigmoid}) {
    const LinearRelaxation r = relax_sshape(k, iv(0.4, 0.4));
    const double v = k == OpKind::Tanh ? std::tanh(0.4) : 1.0 / (1.0 + std::exp(-0.4));
    EXPECT_EQ(lo_slope(r), 0.0);
    EXPECT_NEAR(r.lower_bias[0], v, 1e-12);
    EXPECT_NEAR(r.upper_bias[0], v, 1e-12);
  }
}

TEST(RelaxSshape, SigmoidWideIntervalIsSound) {
  const ScalarRelaxation s = relax_sigmoid_scalar(-6, 6);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng);
    const double y = 1.0 / (1.0 + std::exp(-x));
    ASSERT_LE(s.lower.at(x), y + 1e-9);
    ASSERT_GE(s.upper.at(x), y - 1e-9);
  }
}

TEST(RelaxSshape, OtherKindsAreRejected) { EXPECT_THROW(relax_sshape(OpKind::Sin, iv(0, 1)), std::exception); }

TEST(RelaxSquare, ChordAboveTangentBelow) {
  const LinearRelaxation r = relax_square(iv(-1, 2));
  // Chord through (-1, 1) and (2, 4).
  EXPECT_NEAR(up_slope(r), (4.0 - 1.0) / 3.0, 1e-15);
  EXPECT_NEAR(r.upper_bias[0], 2.0, 1e-15);
  // Tangent at the midpoint 0.5: slope 1, intercept -0.25.
  EXPECT_NEAR(lo_slope(r), 1.0, 1e-15);
  EXPECT_NEAR(r.lower_bias[0], -0.25, 1e-15);
}

TEST(RelaxSquare, MulOfOneParentMatchesSquare) {
  const oracle::OpHarness h = oracle::mul_self_harness();
  const IntervalVector box(Vector::Constant(3, -1), Vector::Constant(3, 2));
  const LinearRelaxation r = relax_node(h.graph, h.node, {box, box}, {});
  const LinearRelaxation s = relax_square(box);
  const Vector x = (Vector(3) << -0.5, 0.3, 1.9).finished();
  EXPECT_TRUE(r.lower_at({x, x}).isApprox(s.lower_at({x})));
  EXPECT_TRUE(r.upper_at({x, x}).isApprox(s.upper_at({x})));
}

TEST(RelaxHeaviside, ThreeCases) {
  const LinearRelaxation off = relax_heaviside(iv(-2, -1));
  EXPECT_EQ(off.lower_bias[0], 0.0);
  EXPECT_EQ(off.upper_bias[0], 0.0);
  const LinearRelaxation on = relax_heaviside(iv(1, 2));
  EXPECT_EQ(on.lower_bias[0], 1.0);
  EXPECT_EQ(on.upper_bias[0], 1.0);
  const LinearRelaxation mixed = relax_heaviside(iv(-1, 2));
  EXPECT_EQ(lo_slope(mixed), 0.0);
  EXPECT_EQ(up_slope(mixed), 0.0);
  EXPECT_EQ(mixed.lower_bias[0], 0.0);
  EXPECT_EQ(mixed.upper_bias[0], 1.0);
}

TEST(RelaxNode, ConcatIsABlockIdentity) {
  const oracle::OpHarness h = oracle::op_harness(OpKind::Concat);
  const PreBox pre = {IntervalVector(Vector::Zero(2), Vector::Ones(2)), IntervalVector(Vector::Zero(1), Vector::Ones(1))};
  const LinearRelaxation r = relax_node(h.graph, h.node, pre, {});
  Matrix full(3, 3);
  full << r.lower[0].to_dense(), r.lower[1].to_dense();
  EXPECT_TRUE(full.isIdentity());
  EXPECT_TRUE(r.exact);
}

TEST(RelaxNode, DispatchMatchesRelu) {
  const oracle::OpHarness h = oracle::op_harness(OpKind::ReLU);
  const IntervalVector pre((Vector(3) << -1, 1, -5).finished(), (Vector(3) << 2, 5, -1).finished());
  const LinearRelaxation a = relax_node(h.graph, h.node, {pre}, {});
  const LinearRelaxation b = relax_relu(pre);
  EXPECT_EQ(a.lower[0].to_dense(), b.lower[0].to_dense());
  EXPECT_EQ(a.upper_bias, b.upper_bias);
}

TEST(RelaxNode, PerNodeAlphaOverride) {
  const oracle::OpHarness h = oracle::op_harness(OpKind::ReLU);
  const IntervalVector pre(Vector::Constant(3, -1), Vector::Constant(3, 2));
  RelaxParams p;
  p.relu_alpha[h.node] = (Vector(3) << 0.0, 0.5, 1.0).finished();
  const LinearRelaxation r = relax_node(h.graph, h.node, {pre}, p);
  EXPECT_EQ(r.lower[0].to_dense().diagonal(), p.relu_alpha[h.node]);
}

TEST(RelaxNode, InputIsUnsupported) {
  const Graph g = fixtures::identity_graph();
  try {
    relax_node(g, 0, {}, {});
    FAIL();
  } catch (const GraphError& e) {
    EXPECT_NE(std::string(e.what()).find("input"), std::string::npos);
  }
}

TEST(RelaxProperty, LinearKindsAreExact) {
  for (OpKind k : {OpKind::Affine, OpKind::Add, OpKind::Sub, OpKind::Neg, OpKind::Scale, OpKind::Concat,
                   OpKind::Slice, OpKind::SumReduce, OpKind::Constant}) {
    const oracle::SweepResult s = oracle::relaxation_sweep(oracle::op_harness(k), 20, 200, 5, 5, 0.0, 4);
    EXPECT_LE(s.worst, 1e-12) << op_tag(k);
  }
}

TEST(RelaxProperty, DegenerateBoxesCollapseToTheValue) {
  for (OpKind k : kAllKinds) {
    const oracle::OpHarness h = oracle::op_harness(k);
    std::vector<Vector> xs;
    PreBox pre;
    for (NodeIndex p : h.graph.parents(h.node)) {
      const Vector v = Vector::LinSpaced(h.graph.dim(p), -0.7, 0.9);
      xs.push_back(v);
      pre.push_back(IntervalVector::point(v));
    }
    const LinearRelaxation r = relax_node(h.graph, h.node, pre, {});
    std::vector<const Vector*> args;
    for (const Vector& v : xs) args.push_back(&v);
    const Vector y = apply_op(h.graph, h.node, args);
    EXPECT_LE((r.lower_at(xs) - y).cwiseAbs().maxCoeff(), 1e-8) << op_tag(k);
    EXPECT_LE((r.upper_at(xs) - y).cwiseAbs().maxCoeff(), 1e-8) << op_tag(k);
  }
}

TEST(RelaxProperty, SampledSoundnessEveryKind) {
  for (OpKind k : kAllKinds) {
    const bool smooth = k == OpKind::Sin || k == OpKind::Cos || k == OpKind::Tanh || k == OpKind::Sigmoid;
    const oracle::SweepResult s =
        oracle::relaxation_sweep(oracle::op_harness(k), 40, 500, smooth ? 8.0 : 3.0, smooth ? 10.0 : 6.0, 1e-9, 9);
    EXPECT_EQ(s.violations, 0) << op_tag(k) << " worst " << s.worst;
  }
  const oracle::SweepResult s = oracle::relaxation_sweep(oracle::mul_self_harness(), 40, 500, 3, 6, 1e-9, 9);
  EXPECT_EQ(s.violations, 0) << "mul(x, x) worst " << s.worst;
}
