#include "boxcert/graph_io.hpp"

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace boxcert {

namespace detail {

json parse_json_text(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw FormatError("parse error: empty document");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("parse error: ") + e.what());
  }
}

void check_version(const json& doc, const std::string& what) {
  if (!doc.is_object()) throw FormatError(what + ": top level must be an object");
  auto it = doc.find("format_version");
  if (it == doc.end()) throw FormatError(what + ": missing field 'format_version'");
  if (!it->is_number_integer() || it->get<int>() != kFormatVersion) {
    throw FormatError(what + ": unsupported format_version " + it->dump() + " (expected " +
                      std::to_string(kFormatVersion) + ")");
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw FormatError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(path + ": missing field '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw FormatError(path + ": expected a number, got " + v.dump());
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw FormatError(path + ": expected an integer, got " + v.dump());
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw FormatError(path + ": expected a string, got " + v.dump());
  return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& path) {
  if (v.is_number()) return Vector::Constant(1, v.get<double>());
  if (!v.is_array()) throw FormatError(path + ": expected a numeric array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix as_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw FormatError(path + ": expected a nonempty array of rows");
  const size_t rows = v.size();
  const size_t cols = v[0].is_array() ? v[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) {
      throw FormatError(rp + ": rows must be arrays of equal length " + std::to_string(cols));
    }
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(v[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

GraphDef graph_from_json(const json& doc, const std::string& path) {
  GraphDef def;
  if (!doc.is_object()) throw FormatError(path + ": expected an object");
  if (auto it = doc.find("name"); it != doc.end()) def.name = as_string(*it, path + ".name");

  const json& inputs = require(doc, "inputs", path);
  if (!inputs.is_array()) throw FormatError(path + ".inputs: expected an array");
  for (size_t k = 0; k < inputs.size(); ++k) {
    const std::string ip = path + ".inputs[" + std::to_string(k) + "]";
    Node n;
    n.kind = OpKind::Input;
    n.id = as_string(require(inputs[k], "id", ip), ip + ".id");
    n.dim = as_int(require(inputs[k], "dim", ip), ip + ".dim");
    def.input_ids.push_back(n.id);
    def.nodes.push_back(std::move(n));
  }

  const json& nodes = require(doc, "nodes", path);
  if (!nodes.is_array()) throw FormatError(path + ".nodes: expected an array");
  for (size_t k = 0; k < nodes.size(); ++k) {
    const std::string np = path + ".nodes[" + std::to_string(k) + "]";
    const json& jn = nodes[k];
    Node n;
    n.id = as_string(require(jn, "id", np), np + ".id");
    const std::string tag = as_string(require(jn, "op", np), np + ".op");
    auto kind = op_from_tag(tag);
    if (!kind || *kind == OpKind::Input) {
      throw FormatError(np + ".op: unknown operator tag '" + tag + "'");
    }
    n.kind = *kind;
    if (auto it = jn.find("parents"); it != jn.end()) {
      if (!it->is_array()) throw FormatError(np + ".parents: expected an array of ids");
      for (size_t p = 0; p < it->size(); ++p) {
        n.parents.push_back(as_string((*it)[p], np + ".parents[" + std::to_string(p) + "]"));
      }
    }
    switch (n.kind) {
      case OpKind::Constant:
        n.value = as_vector(require(jn, "value", np), np + ".value");
        break;
      case OpKind::Affine:
        n.weight = as_matrix(require(jn, "W", np), np + ".W");
        if (auto it = jn.find("b"); it != jn.end()) n.bias = as_vector(*it, np + ".b");
        break;
      case OpKind::Scale:
        n.factor = as_number(require(jn, "factor", np), np + ".factor");
        break;
      case OpKind::Slice:
        n.lo = as_int(require(jn, "lo", np), np + ".lo");
        n.hi = as_int(require(jn, "hi", np), np + ".hi");
        break;
      default:
        break;
    }
    def.nodes.push_back(std::move(n));
  }
  def.output_id = as_string(require(doc, "output", path), path + ".output");
  return def;
}

json graph_to_json(const GraphDef& def) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["name"] = def.name;
  json inputs = json::array();
  for (const auto& id : def.input_ids) {
    for (const auto& n : def.nodes) {
      if (n.id == id) inputs.push_back(json{{"id", n.id}, {"dim", n.dim}});
    }
  }
  doc["inputs"] = std::move(inputs);
  json nodes = json::array();
  for (const auto& n : def.nodes) {
    if (n.kind == OpKind::Input) continue;
    json jn;
    jn["id"] = n.id;
    jn["op"] = std::string(op_tag(n.kind));
    if (!n.parents.empty()) jn["parents"] = n.parents;
    switch (n.kind) {
      case OpKind::Constant:
        jn["value"] = to_json(n.value);
        break;
      case OpKind::Affine:
        jn["W"] = to_json(n.weight);
        if (n.bias.size()) jn["b"] = to_json(n.bias);
        break;
      case OpKind::Scale:
        jn["factor"] = n.factor;
        break;
      case OpKind::Slice:
        jn["lo"] = n.lo;
        jn["hi"] = n.hi;
        break;
      default:
        break;
    }
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  doc["output"] = def.output_id;
  return doc;
}

}  // namespace detail

GraphDef parse_graph(const std::string& text) {
  detail::json doc = detail::parse_json_text(text);
  detail::check_version(doc, "graph");
  return detail::graph_from_json(doc, "graph");
}

std::string serialize_graph(const GraphDef& def) {
  return detail::graph_to_json(def).dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

Graph load_graph(const std::filesystem::path& path) {
  try {
    return Graph::compile(parse_graph(read_text_file(path)));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_graph(const Graph& graph, const std::filesystem::path& path) {
  write_text_file(path, serialize_graph(graph.def()));
}

}  // namespace boxcert
