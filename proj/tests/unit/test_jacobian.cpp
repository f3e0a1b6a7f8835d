#include "boxcert/boundprop.hpp"
#include "boxcert/fixtures.hpp"
#include "boxcert/graph_builder.hpp"
#include "boxcert/jacobian.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace boxcert;

namespace {

Vector grad_part(const AugmentedGraph& ag, const Vector& y) {
  return y.segment(ag.grad_slice.first, ag.grad_slice.second - ag.grad_slice.first);
}

// Scalar smooth fixtures on 2-D boxes.
std::vector<Graph> smooth_fixtures() {
  return {fixtures::tanh_net(1), fixtures::tanh_net(2), fixtures::sigmoid_net(3), fixtures::branching_graph(),
          random_graph(11, 2, 5, {OpKind::Sin, OpKind::Cos, OpKind::Square, OpKind::Mul, OpKind::Tanh}, 2, 1),
          random_graph(12, 3, 4, {OpKind::Sigmoid, OpKind::Concat, OpKind::Slice, OpKind::SumReduce, OpKind::Sub}, 2, 1)};
}

void expect_close_relative(const Vector& a, const Vector& b, double rel) {
  ASSERT_EQ(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_LE(std::abs(a[i] - b[i]), rel * std::max(1.0, std::abs(b[i]))) << "entry " << i;
  }
}

}  // namespace

TEST(Jacobian, SineGivesCosine) {
  const AugmentedGraph ag = augment_with_jacobian(fixtures::sin_graph());
  const Vector y = evaluate(ag.graph, Vector::Zero(1));
  ASSERT_EQ(y.size(), 2);
  EXPECT_EQ(y[ag.value_slice.first], 0.0);
  EXPECT_EQ(grad_part(ag, y)[0], 1.0);
}

TEST(Jacobian, SquareAtThree) {
  GraphBuilder b("sq");
  const Graph g = b.build(b.unary(OpKind::Square, b.input("x", 1)));
  const AugmentedGraph ag = augment_with_jacobian(g);
  const Vector y = evaluate(ag.graph, Vector::Constant(1, 3.0));
  EXPECT_EQ(y[ag.value_slice.first], 9.0);
  EXPECT_EQ(grad_part(ag, y)[0], 6.0);
}

TEST(Jacobian, ReluBecomesHeavisideGate) {
  const AugmentedGraph ag = augment_with_jacobian(fixtures::toy_graph());
  bool gate = false;
  for (int i = 0; i < ag.graph.size(); ++i) gate = gate || ag.graph.kind(i) == OpKind::Heaviside;
  EXPECT_TRUE(gate);
  EXPECT_EQ(grad_part(ag, evaluate(ag.graph, Vector::Constant(1, 1.0)))[0], 2.0);
  EXPECT_EQ(grad_part(ag, evaluate(ag.graph, Vector::Constant(1, 0.0)))[0], 0.0);
}

TEST(Jacobian, VectorOutputIsRejected) {
  try {
    augment_with_jacobian(fixtures::mpc_graph());
    FAIL();
  } catch (const GraphError&) {
  }
}

TEST(Jacobian, AugmentedGraphValidates) {
  for (const Graph& g : smooth_fixtures()) {
    const AugmentedGraph ag = augment_with_jacobian(g);
    EXPECT_TRUE(validate(ag.graph.def()).ok) << g.name();
    EXPECT_EQ(ag.grad_slice.second - ag.grad_slice.first, g.input_dim());
  }
}

TEST(PointGradient, ToyChainRule) {
  const Graph g = fixtures::toy_graph();
  EXPECT_EQ(point_gradient(g, Vector::Constant(1, 1.0))[0], 2.0);
  EXPECT_EQ(point_gradient(g, Vector::Constant(1, 0.0))[0], 0.0);
  // Kink at x = 1/2 takes the zero subgradient.
  EXPECT_EQ(point_gradient(g, Vector::Constant(1, 0.5))[0], 0.0);
}

TEST(PointGradient, AffineIsTransposeTimesCotangent) {
  const Matrix W = (Matrix(2, 3) << 1, 2, 3, -4, 5, -6).finished();
  GraphBuilder b("aff");
  const Graph g = b.build(b.affine({b.input("x", 3)}, W, (Vector(2) << 7, 8).finished()));
  const Vector c = (Vector(2) << 0.5, -2).finished();
  const Vector grad = point_gradient(g, (Vector(3) << 1, 1, 1).finished(), c);
  EXPECT_TRUE(grad.isApprox(W.transpose() * c));
}

TEST(JacobianProperty, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const Box box(Vector::Constant(2, -1.5), Vector::Constant(2, 1.5));
  for (const Graph& g : smooth_fixtures()) {
    const AugmentedGraph ag = augment_with_jacobian(g);
    for (int k = 0; k < 100; ++k) {
      const Vector x = oracle::sample_point(box, rng);
      const Vector fd = oracle::finite_difference(g, x);
      const Vector y = evaluate(ag.graph, x);
      EXPECT_NEAR(y[ag.value_slice.first], evaluate(g, x)[0], 1e-12);
      expect_close_relative(grad_part(ag, y), fd, 1e-5);
      expect_close_relative(point_gradient(g, x), fd, 1e-5);
    }
  }
}

TEST(JacobianProperty, ReluNetAwayFromKinks) {
  const Graph g = fixtures::relu_net(2);
  const AugmentedGraph ag = augment_with_jacobian(g);
  std::mt19937_64 rng(4);
  const Box box(Vector::Constant(2, -1), Vector::Constant(2, 1));
  int checked = 0;
  for (int k = 0; k < 400 && checked < 100; ++k) {
    const Vector x = oracle::sample_point(box, rng);
    const std::vector<Vector> all = evaluate_all(g, x);
    bool near_kink = false;
    for (int i = 0; i < g.size(); ++i) {
      if (g.kind(i) != OpKind::ReLU) continue;
      near_kink = near_kink || all[static_cast<size_t>(g.parents(i)[0])].cwiseAbs().minCoeff() < 1e-3;
    }
    if (near_kink) continue;
    ++checked;
    expect_close_relative(grad_part(ag, evaluate(ag.graph, x)), oracle::finite_difference(g, x), 1e-5);
  }
  EXPECT_EQ(checked, 100);
}

TEST(JacobianProperty, GradientBoundsContainSampledGradients) {
  std::mt19937_64 rng(5);
  std::vector<Graph> graphs = smooth_fixtures();
  graphs.push_back(fixtures::relu_net(2));
  for (const Graph& g : graphs) {
    const AugmentedGraph ag = augment_with_jacobian(g);
    for (int b = 0; b < 5; ++b) {
      const Box box = oracle::random_box(2, 1.0, 1.0, rng);
      const ScalarBounds sb = output_bounds(ag.graph, box, {}, BoundMode::CROWN).bounds;
      for (int k = 0; k < 500; ++k) {
        const Vector x = oracle::sample_point(box, rng);
        const Vector grad = point_gradient(g, x);
        for (int i = 0; i < grad.size(); ++i) {
          const int j = ag.grad_slice.first + i;
          ASSERT_GE(grad[i], sb.lower[j] - 1e-6) << g.name();
          ASSERT_LE(grad[i], sb.upper[j] + 1e-6) << g.name();
        }
      }
    }
  }
}
