#pragma once

// Backward linear bound propagation, interval bound propagation and
// concretization of affine bounds over boxes.

#include "boxcert/parallel.hpp"
#include "boxcert/relax.hpp"

#include <optional>
#include <vector>

namespace boxcert {

/// A_l x + b_l <= C F(x) <= A_u x + b_u for every x in `box`, where C is the
/// objective matrix of the query (identity when none was given).
struct AffineBound {
  Matrix A_l;
  Vector b_l;
  Matrix A_u;
  Vector b_u;
  Box box;
};

enum class BoundMode { IBP, CROWN };

/// Sound interval bounds on node outputs over one box, indexed by node.
class PreactivationCache {
 public:
  PreactivationCache() = default;
  explicit PreactivationCache(int num_nodes) : entries_(static_cast<size_t>(num_nodes)) {}

  bool has(NodeIndex i) const {
    return i >= 0 && static_cast<size_t>(i) < entries_.size() && entries_[static_cast<size_t>(i)];
  }
  /// Throws GraphError naming the node when absent.
  const IntervalVector& at(const Graph& graph, NodeIndex i) const;
  void set(NodeIndex i, IntervalVector iv) { entries_[static_cast<size_t>(i)] = std::move(iv); }

 private:
  std::vector<std::optional<IntervalVector>> entries_;
};

ScalarBounds concretize(const AffineBound& bound);

/// Bounds C h_target(x) over the box. `objective` (rows x dim(target))
/// defaults to the identity. The cache must hold every parent of every
/// nonlinear ancestor of the target.
AffineBound backward_bounds(const Graph& graph, const Box& box, NodeIndex target,
                            const PreactivationCache& cache, const RelaxParams& params,
                            const Matrix* objective = nullptr);

/// Per-node intervals over the box. IBP mode propagates intervals forward;
/// CROWN mode additionally bounds every parent of a nonlinear node by a
/// backward pass and keeps the intersection with its interval.
PreactivationCache compute_preactivations(const Graph& graph, const Box& box,
                                          const RelaxParams& params, BoundMode mode);

struct OutputBounds {
  ScalarBounds bounds;
  AffineBound affine;
};

/// Full pipeline on the output node (or on C·output when `objective` is
/// given). In CROWN mode the scalar bounds are the concretized backward bound
/// intersected with the interval bound; in IBP mode they are the interval
/// bound alone, and the affine bound is the backward pass over the interval
/// preactivations.
OutputBounds output_bounds(const Graph& graph, const Box& box, const RelaxParams& params,
                           BoundMode mode, const Matrix* objective = nullptr);

/// output_bounds over a batch of boxes. Work is split over `workers` threads;
/// results are ordered like `boxes`.
std::vector<OutputBounds> output_bounds_batch(const Graph& graph, const std::vector<Box>& boxes,
                                              const RelaxParams& params, BoundMode mode,
                                              const std::vector<Matrix>& objectives,
                                              int workers = 1);

}  // namespace boxcert
