#include "boxcert/bundle_io.hpp"

#include "boxcert/graph_io.hpp"
#include "json_util.hpp"

namespace boxcert {

using detail::json;

namespace {

constexpr const char* kRoles[] = {"dynamics", "controller", "certificate", "disturbance", "metric"};

std::optional<Graph>& slot(SystemBundle& s, std::string_view role) {
  if (role == "dynamics") return s.dynamics;
  if (role == "controller") return s.controller;
  if (role == "certificate") return s.certificate;
  if (role == "disturbance") return s.disturbance;
  return s.metric;
}

const std::optional<Graph>& slot(const SystemBundle& s, std::string_view role) {
  if (role == "dynamics") return s.dynamics;
  if (role == "controller") return s.controller;
  if (role == "certificate") return s.certificate;
  if (role == "disturbance") return s.disturbance;
  return s.metric;
}

Box parse_box(const json& v, const std::string& path) {
  Vector lo = detail::as_vector(detail::require(v, "lower", path), path + ".lower");
  Vector hi = detail::as_vector(detail::require(v, "upper", path), path + ".upper");
  if (lo.size() != hi.size()) throw FormatError(path + ": lower and upper differ in length");
  if ((lo.array() > hi.array()).any()) throw FormatError(path + ": lower exceeds upper");
  return Box(lo, hi);
}

Graph compile_fragment(GraphDef def, const std::string& path) {
  try {
    return Graph::compile(std::move(def));
  } catch (const GraphError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace

BundleFile parse_bundle(const std::string& text, const std::filesystem::path& base_dir) {
  const json doc = detail::parse_json_text(text);
  detail::check_version(doc, "bundle");
  BundleFile out;
  if (auto it = doc.find("name"); it != doc.end()) out.system.name = detail::as_string(*it, "bundle.name");
  const json& frags = detail::require(doc, "fragments", "bundle");
  if (!frags.is_object()) throw FormatError("bundle.fragments: expected an object keyed by role");
  for (auto it = frags.begin(); it != frags.end(); ++it) {
    const std::string role = it.key();
    const std::string path = "bundle.fragments." + role;
    bool known = false;
    for (const char* r : kRoles) known = known || role == r;
    if (!known) throw FormatError(path + ": unknown role '" + role + "'");
    GraphDef def;
    if (auto f = it->find("file"); f != it->end()) {
      const std::filesystem::path file = base_dir / detail::as_string(*f, path + ".file");
      def = parse_graph(read_text_file(file));
    } else {
      def = detail::graph_from_json(*it, path);
    }
    slot(out.system, role) = compile_fragment(std::move(def), path);
  }
  if (!out.system.dynamics) throw FormatError("bundle.fragments: missing the 'dynamics' fragment");
  if (auto it = doc.find("box"); it != doc.end()) out.box = parse_box(*it, "bundle.box");
  if (auto it = doc.find("w_box"); it != doc.end()) out.w_box = parse_box(*it, "bundle.w_box");
  return out;
}

std::string serialize_bundle(const BundleFile& bundle) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["name"] = bundle.system.name;
  json frags = json::object();
  for (const char* role : kRoles) {
    if (const auto& g = slot(bundle.system, role)) frags[role] = detail::graph_to_json(g->def());
  }
  doc["fragments"] = std::move(frags);
  if (bundle.box) doc["box"] = {{"lower", detail::to_json(bundle.box->lower)}, {"upper", detail::to_json(bundle.box->upper)}};
  if (bundle.w_box) {
    doc["w_box"] = {{"lower", detail::to_json(bundle.w_box->lower)}, {"upper", detail::to_json(bundle.w_box->upper)}};
  }
  return doc.dump(2) + "\n";
}

BundleFile load_bundle(const std::filesystem::path& path) {
  try {
    return parse_bundle(read_text_file(path), path.parent_path());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace boxcert
