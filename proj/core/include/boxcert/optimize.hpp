#pragma once

// Certified global minimization of a linear functional of the graph output
// over a box, by best-first branch-and-bound with incumbent pruning.

#include "boxcert/bab.hpp"

#include <string_view>
#include <vector>

namespace boxcert {

enum class OptStatus { OptimalWithinGap, BudgetExhausted, Infeasible };

std::string_view to_string(OptStatus s);

struct OptConfig {
  double gap_tol = 1e-3;
  double timeout = 360.0;
  long max_domains = 200000;
  int batch = 16;
  Branching branching = Branching::Smart;
  /// Incumbent search on the root box.
  PGDConfig pgd{3, 60, 0.1, 16, 20240607, 1};
  /// Incumbent search on every new subdomain.
  PGDConfig sub_pgd{1, 20, 0.1, 2, 20240607, 1};
  double min_width = 1e-12;
  int workers = 1;
  BoundMode mode = BoundMode::CROWN;
  RelaxParams relax;
  bool record_trace = false;
  bool record_pruned = false;
};

struct OptStats {
  long domains = 0;  // subdomains bounded
  int max_depth = 0;
  long pruned_bound = 0;
  long pruned_infeasible = 0;
  double wall_time = 0.0;
};

struct OptTracePoint {
  long domains = 0;
  double lower = 0.0;
  double primal = 0.0;
};

struct OptResult {
  OptStatus status = OptStatus::BudgetExhausted;
  /// True for maximize; then certified_bound is an upper bound.
  bool maximize = false;
  bool has_incumbent = false;
  Vector x_best;
  double primal_value = 0.0;
  /// Certified lower bound on the minimum (upper bound on the maximum).
  double certified_bound = 0.0;
  double gap = 0.0;
  OptStats stats;
  /// In minimization sense, one entry per batch (record_trace).
  std::vector<OptTracePoint> trace;
  /// Boxes discarded because their lower bound exceeded the incumbent
  /// (record_pruned).
  std::vector<Box> pruned;
};

/// Minimizes objᵀF(x) over the box, subject to every clause of
/// `constraints` (when given) holding at x.
OptResult minimize(const Graph& graph, const Vector& objective, const Box& box,
                   const SpecCNF* constraints, const OptConfig& cfg);

/// Negates the objective and delegates to minimize.
OptResult maximize(const Graph& graph, const Vector& objective, const Box& box,
                   const SpecCNF* constraints, const OptConfig& cfg);

}  // namespace boxcert
