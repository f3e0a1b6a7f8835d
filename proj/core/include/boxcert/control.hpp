#pragma once

// Control certificates as verification problems: each builder composes the
// system fragments into one graph and encodes the certificate condition as a
// CNF over its outputs.

#include "boxcert/boundprop.hpp"
#include "boxcert/spec.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace boxcert {

/// Graph fragments of a system. The dynamics inputs are, in declaration
/// order: the state x, then the control u when a controller is present,
/// then the disturbance w for robustness problems. For barrier problems the
/// dynamics take (x, u) and must be affine in u.
struct SystemBundle {
  std::string name = "system";
  std::optional<Graph> dynamics;
  std::optional<Graph> controller;   // pi(x)
  std::optional<Graph> certificate;  // V(x) or h(x), scalar
  std::optional<Graph> disturbance;  // psi(w), scalar
  std::optional<Graph> metric;       // upper-triangular entries of M(x), row-major

  int state_dim() const;
};

struct LevelParams {
  double rho = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double kappa = 0.5;
  double alpha = 1.0;
  double nu = 0.0;
  double epsilon = 0.1;
  double rate = 0.9;
  /// Boundary tolerance of the strict atoms standing for non-strict
  /// conditions.
  double tol = 1e-6;
};

/// Named half-open ranges of the problem graph's output.
using OutputLayout = std::vector<std::pair<std::string, std::pair<int, int>>>;

struct CertificateProblem {
  Graph graph;
  SpecCNF spec;
  OutputLayout layout;

  std::pair<int, int> range(const std::string& name) const;
};

/// The closed-loop map x -> f(x, pi(x)) (or f(x) without a controller).
Graph closed_loop(const SystemBundle& bundle);

ScalarBounds reach_step(const SystemBundle& bundle, const Box& box,
                        BoundMode mode = BoundMode::CROWN);

struct ReachTube {
  std::vector<ScalarBounds> steps;  // steps[k] over-approximates the states after k+1 steps
  bool diverged = false;
  int diverged_at = -1;  // index of the first step whose width exceeded the ceiling
};

/// Folds reach_step k times. Stops early, marking divergence, when a box
/// edge exceeds `ceiling`.
ReachTube reach_tube(const SystemBundle& bundle, const Box& box, int steps, double ceiling = 1e3,
                     BoundMode mode = BoundMode::CROWN);

/// Outputs [F, g(x), V(x)] with F = V(g(x)) - (1 - kappa) V(x). Clauses
/// {-F + tol > 0, V - rho > 0} and, per face of B, {g inside that face,
/// V - rho > 0}.
CertificateProblem build_discrete_lyapunov(const SystemBundle& bundle, const Box& box,
                                           const LevelParams& params);

/// Outputs [F, V, x, G] with F = grad V . f + kappa V and G the outward
/// normal velocity on each face (lower then upper face per coordinate).
/// Clauses {-F + tol > 0, V - c2 > 0, c1 - V > 0} and, per face,
/// {-G + tol > 0, distance to the face > tol, V - c2 > 0}.
CertificateProblem build_continuous_lyapunov(const SystemBundle& bundle, const Box& box,
                                             const LevelParams& params);

/// Joint input [x, w]. Outputs [F, f(x, w), V(x), psi(w)] with
/// F = V(f(x, w)) - (1 - kappa) V(x) - psi(w). Requires nu / kappa <= rho.
CertificateProblem build_robust_roa(const SystemBundle& bundle, const Box& box_x, const Box& box_w,
                                    const LevelParams& params);

/// Joint input [x, delta] with delta in [-epsilon, epsilon]^n. Outputs
/// [G, V(x), V(x + delta), x + delta] with
/// G = D^T M(g(x)) D - rate^2 delta^T M(x) delta and D = g(x + delta) - g(x).
/// Without a metric fragment M is the identity.
CertificateProblem build_contraction(const SystemBundle& bundle, const Box& box,
                                     const LevelParams& params);

/// Outputs [B_1, ..., B_K, h] with B_v = grad h . f(x, u_v) + alpha h. One
/// clause {B_1 + tol > 0, ..., B_K + tol > 0, -h > 0}.
CertificateProblem build_barrier(const SystemBundle& bundle, const Box& box, const LevelParams& params,
                                 const std::vector<Vector>& vertices);

}  // namespace boxcert
