#pragma once

// Projected gradient descent search for exact counterexamples.

#include "boxcert/spec.hpp"

#include <cstdint>
#include <optional>

namespace boxcert {

struct PGDConfig {
  int restarts = 5;
  int steps = 100;
  double step_size = 0.1;  // fraction of each box edge
  int batch = 64;          // candidates per restart
  std::uint64_t seed = 20240607;
  int workers = 1;
};

struct Counterexample {
  Vector x;
  int clause_index = -1;
  double margin = 0.0;  // <= 0
};

/// Descends the smallest clause margin from uniformly drawn candidates,
/// clamping to `box` after every step. Returns the violation with the
/// smallest (clause, candidate) index of the first restart that finds one.
/// Only violations confirmed by exact evaluation are returned.
std::optional<Counterexample> pgd_search(const Graph& graph, const SpecCNF& spec, const Box& box,
                                         const PGDConfig& cfg);

}  // namespace boxcert
