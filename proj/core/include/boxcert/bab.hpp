#pragma once

// Complete verification of CNF specifications by input-domain
// branch-and-bound: falsify, bound the root, then split and bound until every
// subdomain is certified, a counterexample is confirmed, or the budget runs
// out.

#include "boxcert/boundprop.hpp"
#include "boxcert/falsify.hpp"

#include <functional>
#include <optional>
#include <string_view>

namespace boxcert {

enum class Branching { Naive, Smart };
enum class VerifyStatus { Verified, Falsified, Unknown };

std::string_view to_string(VerifyStatus s);
std::string_view to_string(Branching b);
std::optional<Branching> branching_from_string(std::string_view s);

struct VerifyConfig {
  double timeout = 360.0;  // seconds, checked between batches
  long max_domains = 200000;
  int batch = 64;
  Branching branching = Branching::Smart;
  PGDConfig pgd;
  /// Budget of the falsifier run on every still-pending subdomain.
  PGDConfig sub_pgd{1, 30, 0.1, 8, 20240607, 1};
  bool falsify = true;
  /// Clause lower bounds must exceed this to certify.
  double tolerance = 1e-9;
  /// Boxes narrower than this in every dimension are not split further.
  double min_width = 1e-12;
  int workers = 1;
  BoundMode mode = BoundMode::CROWN;
  RelaxParams relax;
};

struct VerifyStats {
  long domains = 0;  // subdomains bounded
  int max_depth = 0;
  double wall_time = 0.0;
  /// Smallest clause lower bound over the leaves at termination.
  double worst_bound = 0.0;
  /// Subdomains left undecided because they could not be split.
  long unsplittable = 0;
};

struct VerifyResult {
  VerifyStatus status = VerifyStatus::Unknown;
  std::optional<Counterexample> counterexample;
  VerifyStats stats;
};

struct Subdomain {
  Box box;
  Vector clause_bounds;      // certified lower margin per clause (inherited when certified)
  std::vector<int> pending;  // clauses with bound <= tolerance
  int depth = 0;
  long id = 0;
};

/// State after each bounding batch, for progress reporting and partition
/// accounting.
struct BabSnapshot {
  double root_volume = 0.0;
  double certified_volume = 0.0;
  double open_volume = 0.0;  // stack plus unsplittable boxes
  long domains = 0;
  const std::vector<Subdomain>* stack = nullptr;
};
using BabObserver = std::function<void(const BabSnapshot&)>;

/// Lower bound of the clause margin max over atoms on the box, together with
/// the lower-bound coefficients of the maximizing atom.
struct ClauseBound {
  double value = 0.0;
  int atom = 0;
  Vector coeffs;
};

ClauseBound bound_clause(const Graph& graph, const Clause& clause, const Box& box,
                         const RelaxParams& params, BoundMode mode = BoundMode::CROWN);
double clause_lower_bound(const Graph& graph, const Clause& clause, const Box& box,
                          const RelaxParams& params, BoundMode mode = BoundMode::CROWN);

/// Bounds several clauses of one spec on one box in a single backward pass.
std::vector<ClauseBound> bound_clauses(const Graph& graph, const SpecCNF& spec,
                                       const std::vector<int>& clauses, const Box& box,
                                       const RelaxParams& params, BoundMode mode);

/// Split dimension: longest edge (naive) or argmax |coeffs_i| * width_i
/// (smart, falling back to naive when every score is zero). Ties go to the
/// lowest index. Throws GraphError on a zero-width box.
int split_dimension(const Box& box, const Vector& coeffs, Branching strategy);
std::pair<Box, Box> split(const Box& box, const Vector& coeffs, Branching strategy);

VerifyResult verify(const Graph& graph, const SpecCNF& spec, const VerifyConfig& cfg,
                    const BabObserver& observer = {});

}  // namespace boxcert
