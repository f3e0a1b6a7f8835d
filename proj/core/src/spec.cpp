#include "boxcert/spec.hpp"

#include "boxcert/graph_io.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <limits>

namespace boxcert {

using detail::json;

int SpecCNF::output_dim() const {
  for (const auto& c : clauses) {
    if (!c.atoms.empty()) return static_cast<int>(c.atoms.front().coeffs.size());
  }
  return 0;
}

Atom make_atom(Vector coeffs, double bias, Sense sense) {
  if (coeffs.size() == 0 || (coeffs.array() == 0.0).all()) {
    throw FormatError("atom coefficients are all zero");
  }
  if (sense == Sense::Less) return {-coeffs, -bias};
  return {std::move(coeffs), bias};
}

void check_spec(const SpecCNF& spec) {
  if (spec.clauses.empty()) throw FormatError("spec has no clauses");
  if (spec.input_box.lower.size() != spec.input_box.upper.size()) {
    throw FormatError("spec box: lower and upper differ in length");
  }
  if ((spec.input_box.lower.array() > spec.input_box.upper.array()).any()) {
    throw FormatError("spec box: lower exceeds upper");
  }
  const int m = spec.output_dim();
  for (size_t c = 0; c < spec.clauses.size(); ++c) {
    const auto& atoms = spec.clauses[c].atoms;
    const std::string where = "clause " + std::to_string(c);
    if (atoms.empty()) throw FormatError(where + " is empty");
    for (size_t a = 0; a < atoms.size(); ++a) {
      if (atoms[a].coeffs.size() != m) throw FormatError(where + ": atoms disagree on output dimension");
      if ((atoms[a].coeffs.array() == 0.0).all()) throw FormatError(where + ": atom with all-zero coefficients");
      for (size_t b = a + 1; b < atoms.size(); ++b) {
        if (atoms[a] == atoms[b]) throw FormatError(where + ": duplicate atom");
      }
    }
  }
}

void check_spec(const SpecCNF& spec, const Graph& graph) {
  check_spec(spec);
  if (spec.output_dim() != graph.output_dim()) {
    throw FormatError("spec atoms have " + std::to_string(spec.output_dim()) + " coefficients but graph '" +
                      graph.name() + "' has output dimension " + std::to_string(graph.output_dim()));
  }
  if (spec.input_box.dim() != graph.input_dim()) {
    throw FormatError("spec box has dimension " + std::to_string(spec.input_box.dim()) + " but graph '" +
                      graph.name() + "' has input dimension " + std::to_string(graph.input_dim()));
  }
}

std::vector<Atom> box_face_atoms(const Box& box, int output_dim, int offset, double tol) {
  std::vector<Atom> out;
  for (int k = 0; k < box.dim(); ++k) {
    Vector e = Vector::Zero(output_dim);
    e[offset + k] = 1.0;
    out.push_back({e, -box.lower[k] - tol});
    out.push_back({-e, box.upper[k] - tol});
  }
  return out;
}

std::vector<Atom> outside_box_atoms(const Box& box, int output_dim, int offset, double tol) {
  std::vector<Atom> out;
  for (int k = 0; k < box.dim(); ++k) {
    Vector e = Vector::Zero(output_dim);
    e[offset + k] = 1.0;
    out.push_back({-e, box.lower[k] - tol});
    out.push_back({e, -box.upper[k] - tol});
  }
  return out;
}

namespace {

Sense parse_sense(const json& v, const std::string& path) {
  const std::string s = detail::as_string(v, path);
  if (s == ">") return Sense::Greater;
  if (s == "<") return Sense::Less;
  throw FormatError(path + ": sense must be \">\" or \"<\", got \"" + s + "\"");
}

struct Membership {
  Box box;
  int offset = 0;
  double tol = 0.0;
};

Membership parse_membership(const json& v, int m, const std::string& path) {
  Membership mb;
  mb.box = Box(detail::as_vector(detail::require(v, "lower", path), path + ".lower"),
               detail::as_vector(detail::require(v, "upper", path), path + ".upper"));
  if (auto it = v.find("offset"); it != v.end()) mb.offset = detail::as_int(*it, path + ".offset");
  if (auto it = v.find("tol"); it != v.end()) mb.tol = detail::as_number(*it, path + ".tol");
  if (mb.offset < 0 || mb.offset + mb.box.dim() > m) {
    throw FormatError(path + ": membership range exceeds output dimension " + std::to_string(m));
  }
  return mb;
}

Atom parse_atom(const json& v, int m, const std::string& path) {
  Vector coeffs;
  if (auto it = v.find("index"); it != v.end()) {
    const int k = detail::as_int(*it, path + ".index");
    if (k < 0 || k >= m) throw FormatError(path + ".index: out of range for output dimension " + std::to_string(m));
    coeffs = Vector::Zero(m);
    coeffs[k] = 1.0;
    if (auto s = v.find("scale"); s != v.end()) coeffs[k] = detail::as_number(*s, path + ".scale");
  } else {
    coeffs = detail::as_vector(detail::require(v, "coeffs", path), path + ".coeffs");
    if (coeffs.size() != m) {
      throw FormatError(path + ".coeffs: expected " + std::to_string(m) + " entries, got " +
                        std::to_string(coeffs.size()));
    }
  }
  double bias = 0.0;
  if (auto it = v.find("bias"); it != v.end()) bias = detail::as_number(*it, path + ".bias");
  const Sense sense = parse_sense(detail::require(v, "sense", path), path + ".sense");
  try {
    return make_atom(std::move(coeffs), bias, sense);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void push_unique(std::vector<Atom>& atoms, Atom a) {
  if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(std::move(a));
}

}  // namespace

SpecCNF parse_spec(const std::string& text) {
  const json doc = detail::parse_json_text(text);
  detail::check_version(doc, "spec");
  SpecCNF spec;
  const json& box = detail::require(doc, "box", "spec");
  spec.input_box = Box(detail::as_vector(detail::require(box, "lower", "spec.box"), "spec.box.lower"),
                       detail::as_vector(detail::require(box, "upper", "spec.box"), "spec.box.upper"));
  const int m = detail::as_int(detail::require(doc, "output_dim", "spec"), "spec.output_dim");
  if (m <= 0) throw FormatError("spec.output_dim: must be positive");

  if (auto it = doc.find("in_box"); it != doc.end()) {
    if (!it->is_array()) throw FormatError("spec.in_box: expected an array");
    for (size_t k = 0; k < it->size(); ++k) {
      const Membership mb = parse_membership((*it)[k], m, "spec.in_box[" + std::to_string(k) + "]");
      for (Atom& a : box_face_atoms(mb.box, m, mb.offset, mb.tol)) spec.clauses.push_back({{std::move(a)}});
    }
  }

  const json& clauses = detail::require(doc, "clauses", "spec");
  if (!clauses.is_array()) throw FormatError("spec.clauses: expected an array of clauses");
  for (size_t c = 0; c < clauses.size(); ++c) {
    const std::string cp = "spec.clauses[" + std::to_string(c) + "]";
    if (!clauses[c].is_array() || clauses[c].empty()) throw FormatError(cp + ": expected a nonempty array of atoms");
    Clause clause;
    for (size_t a = 0; a < clauses[c].size(); ++a) {
      const std::string ap = cp + "[" + std::to_string(a) + "]";
      const json& ja = clauses[c][a];
      if (auto nb = ja.find("not_in_box"); nb != ja.end()) {
        const Membership mb = parse_membership(*nb, m, ap + ".not_in_box");
        for (Atom& at : outside_box_atoms(mb.box, m, mb.offset, mb.tol)) push_unique(clause.atoms, std::move(at));
      } else {
        push_unique(clause.atoms, parse_atom(ja, m, ap));
      }
    }
    spec.clauses.push_back(std::move(clause));
  }
  check_spec(spec);
  return spec;
}

std::string serialize_spec(const SpecCNF& spec) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["output_dim"] = spec.output_dim();
  doc["box"] = {{"lower", detail::to_json(spec.input_box.lower)}, {"upper", detail::to_json(spec.input_box.upper)}};
  json clauses = json::array();
  for (const auto& c : spec.clauses) {
    json jc = json::array();
    for (const auto& a : c.atoms) {
      jc.push_back({{"coeffs", detail::to_json(a.coeffs)}, {"bias", a.bias}, {"sense", ">"}});
    }
    clauses.push_back(std::move(jc));
  }
  doc["clauses"] = std::move(clauses);
  return doc.dump(2) + "\n";
}

SpecCNF load_spec(const std::filesystem::path& path) {
  try {
    return parse_spec(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

double clause_margin(const Clause& clause, const Vector& y) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : clause.atoms) best = std::max(best, a.margin(y));
  return best;
}

PointCheck check_output(const SpecCNF& spec, const Vector& y) {
  for (size_t c = 0; c < spec.clauses.size(); ++c) {
    const double m = clause_margin(spec.clauses[c], y);
    if (!(m > 0.0)) return {false, static_cast<int>(c), m};
  }
  return {};
}

PointCheck check_point(const SpecCNF& spec, const Graph& graph, const Vector& x) {
  if (!spec.input_box.contains(x)) throw GraphError("check_point: point lies outside the spec box");
  return check_output(spec, evaluate(graph, x));
}

}  // namespace boxcert
