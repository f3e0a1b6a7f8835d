#pragma once

// CNF specifications: conjunctions of clauses, each a disjunction of strict
// linear inequalities over the graph output.

#include "boxcert/box.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace boxcert {

/// coeffsᵀy + bias > 0. Less-sense atoms are stored negated.
struct Atom {
  Vector coeffs;
  double bias = 0.0;

  double margin(const Vector& y) const { return coeffs.dot(y) + bias; }
  friend bool operator==(const Atom& a, const Atom& b) {
    return a.coeffs == b.coeffs && a.bias == b.bias;
  }
};

struct Clause {
  std::vector<Atom> atoms;
};

struct SpecCNF {
  std::vector<Clause> clauses;
  Box input_box;

  int output_dim() const;
};

enum class Sense { Greater, Less };

/// Builds a greater-sense atom from coeffsᵀy + bias (> or <) 0. Throws
/// FormatError when every coefficient is zero.
Atom make_atom(Vector coeffs, double bias, Sense sense);

/// Checks clause and atom invariants (nonempty, nonzero coefficients, one
/// output dimension, no duplicate atoms in a clause, box well-formed).
void check_spec(const SpecCNF& spec);
/// Additionally checks the output and input dimensions against a graph.
void check_spec(const SpecCNF& spec, const Graph& graph);

SpecCNF parse_spec(const std::string& text);
std::string serialize_spec(const SpecCNF& spec);
SpecCNF load_spec(const std::filesystem::path& path);

/// max over atoms of coeffsᵀy + bias.
double clause_margin(const Clause& clause, const Vector& y);

struct PointCheck {
  bool satisfied = true;
  int clause_index = -1;  // first violated clause
  double margin = 0.0;    // its margin (<= 0) when violated
};

/// Exact evaluation; throws GraphError when x is outside the input box.
PointCheck check_point(const SpecCNF& spec, const Graph& graph, const Vector& x);
/// Same check on an already evaluated output.
PointCheck check_output(const SpecCNF& spec, const Vector& y);

/// Unit clauses y_k - l_k > 0 and u_k - y_k > 0 over output coordinates
/// [offset, offset + box.dim()), shrunk by `tol`.
std::vector<Atom> box_face_atoms(const Box& box, int output_dim, int offset, double tol);
/// Atoms whose disjunction says y[offset, offset+dim) lies outside the box
/// widened by `tol`.
std::vector<Atom> outside_box_atoms(const Box& box, int output_dim, int offset, double tol);

}  // namespace boxcert
