#include "boxcert/cli.hpp"

#include "boxcert/bundle_io.hpp"
#include "boxcert/graph_io.hpp"
#include "boxcert/jacobian.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "flags.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace boxcert::cli {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

namespace {

struct Parsed {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::vector<std::string> sets;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;  // command -> flag -> option
};

std::unique_ptr<CLI::App> build_app(Parsed& p) {
  auto app = std::make_unique<CLI::App>("Certified bounds, verification and optimization over computation graphs",
                                        "boxcert");
  app->require_subcommand(1);
  app->set_version_flag("--version", "boxcert 0.1.0");
  for (const CommandInfo& c : command_table()) {
    CLI::App* sub = app->add_subcommand(c.name, c.summary);
    for (const Flag& f : flag_table()) {
      if (!(f.commands & c.id)) continue;
      const std::string name = std::string("--") + f.name;
      CLI::Option* opt = nullptr;
      switch (f.kind) {
        case FlagKind::Value:
          opt = sub->add_option(name, p.values[f.name], f.help)->type_name(f.value);
          break;
        case FlagKind::Switch:
          opt = sub->add_flag(name, p.switches[f.name], f.help);
          break;
        case FlagKind::Repeated:
          opt = sub->add_option(name, p.sets, f.help)->type_name(f.value)->take_all()->expected(1);
          opt->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
          break;
      }
      if (f.required & c.id) opt->required();
      p.options[c.name][f.name] = opt;
    }
  }
  return app;
}

std::string rel(const std::string& path) { return std::filesystem::path(path).filename().string(); }

/// Per-run state shared by the command implementations.
struct Run {
  std::string command;
  Parsed* parsed = nullptr;
  json cfg;
  json inputs = json::object();
  std::ostream* err = nullptr;

  bool given(const std::string& flag) const {
    auto it = parsed->options.at(command).find(flag);
    return it != parsed->options.at(command).end() && it->second->count() > 0;
  }
  const std::string& value(const std::string& flag) const { return parsed->values.at(flag); }
  bool timing() const { return parsed->switches["timing"]; }

  std::string read_input(const std::string& role, const std::string& path) {
    std::string text = read_text_file(path);
    inputs[role] = {{"file", rel(path)}, {"fnv1a64", fnv1a_hex(text)}};
    return text;
  }
};

std::vector<double> parse_numbers(const std::string& text, const std::string& flag) {
  std::string s = text;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--" + flag + ": '" + tok + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError("--" + flag + ": no numbers given");
  return out;
}

Box parse_box_flag(const std::string& text, const std::string& flag) {
  const std::vector<double> v = parse_numbers(text, flag);
  if (v.size() % 2 != 0) throw UsageError("--" + flag + ": expected lower/upper pairs");
  for (size_t i = 0; i < v.size(); i += 2) {
    if (!(v[i] <= v[i + 1])) throw UsageError("--" + flag + ": lower exceeds upper in pair " + std::to_string(i / 2));
  }
  return Box::from_pairs(v);
}

void require_dim(const Box& box, int dim, const std::string& what) {
  if (box.dim() != dim) {
    throw UsageError(what + " has dimension " + std::to_string(box.dim()) + ", expected " + std::to_string(dim));
  }
}

Graph read_graph(Run& run, const std::string& role, const std::string& path) {
  const std::string text = run.read_input(role, path);
  try {
    return Graph::compile(parse_graph(text));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const GraphError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

SpecCNF read_spec(Run& run, const std::string& role, const std::string& path) {
  const std::string text = run.read_input(role, path);
  try {
    return parse_spec(text);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

json box_json(const Box& b) { return {{"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}}; }

json header(const Run& run) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["mode"] = run.command;
  doc["inputs"] = run.inputs;
  return doc;
}

json config_echo(const Run& run, std::initializer_list<const char*> sections) {
  json echo;
  for (const char* s : sections) echo[s] = run.cfg.at(s);
  return echo;
}

json counterexample_json(const Counterexample& c, const Graph& graph, const OutputLayout* layout) {
  const Vector y = evaluate(graph, c.x);
  json j;
  j["x"] = to_json(c.x);
  j["clause_index"] = c.clause_index;
  j["margin"] = c.margin;
  j["output"] = to_json(y);
  if (layout) {
    json parts;
    for (const auto& [name, r] : *layout) parts[name] = to_json(Vector(y.segment(r.first, r.second - r.first)));
    j["components"] = std::move(parts);
  }
  return j;
}

json verify_stats(const VerifyStats& s, bool timing) {
  json j;
  j["domains"] = s.domains;
  j["max_depth"] = s.max_depth;
  j["worst_bound"] = s.worst_bound;
  j["unsplittable"] = s.unsplittable;
  if (timing) j["wall_time"] = s.wall_time;
  return j;
}

int status_code(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Verified:
      return kOk;
    case VerifyStatus::Falsified:
      return kFalsified;
    case VerifyStatus::Unknown:
      break;
  }
  return kUnknown;
}

int cmd_bounds(Run& run, json& doc) {
  const Graph graph = read_graph(run, "graph", run.value("graph"));
  const Box box = parse_box_flag(run.value("box"), "box");
  require_dim(box, graph.input_dim(), "--box");
  const BoundMode mode = bound_mode(run.cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const OutputBounds ob = output_bounds(graph, box, {}, mode);

  doc = header(run);
  doc["config"] = config_echo(run, {"bound"});
  doc["box"] = box_json(box);
  doc["bounds"] = {{"lower", to_json(ob.bounds.lower)}, {"upper", to_json(ob.bounds.upper)}};
  doc["linear_bounds"] = {{"A_l", to_json(ob.affine.A_l)},
                          {"b_l", to_json(ob.affine.b_l)},
                          {"A_u", to_json(ob.affine.A_u)},
                          {"b_u", to_json(ob.affine.b_u)}};
  if (run.parsed->switches["with-jacobian"]) {
    const AugmentedGraph aug = [&] {
      try {
        return augment_with_jacobian(graph);
      } catch (const GraphError& e) {
        throw FormatError(run.value("graph") + ": " + e.what());
      }
    }();
    const OutputBounds gb = output_bounds(aug.graph, box, {}, mode);
    const auto [lo, hi] = aug.grad_slice;
    doc["gradient"] = {{"lower", to_json(Vector(gb.bounds.lower.segment(lo, hi - lo)))},
                       {"upper", to_json(Vector(gb.bounds.upper.segment(lo, hi - lo)))}};
  }
  if (run.timing()) {
    doc["stats"] = {{"wall_time", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  }
  return kOk;
}

int cmd_verify(Run& run, json& doc) {
  const Graph graph = read_graph(run, "graph", run.value("graph"));
  SpecCNF spec = read_spec(run, "spec", run.value("spec"));
  if (run.given("box")) spec.input_box = parse_box_flag(run.value("box"), "box");
  try {
    check_spec(spec, graph);
  } catch (const GraphError& e) {
    throw FormatError(run.value("spec") + ": " + e.what());
  }
  const VerifyConfig vc = verify_config(run.cfg);
  const VerifyResult r = verify(graph, spec, vc);

  doc = header(run);
  doc["config"] = config_echo(run, {"seed", "workers", "bound", "pgd", "bab"});
  doc["box"] = box_json(spec.input_box);
  doc["status"] = to_string(r.status);
  if (r.counterexample) doc["counterexample"] = counterexample_json(*r.counterexample, graph, nullptr);
  doc["stats"] = verify_stats(r.stats, run.timing());
  return status_code(r.status);
}

int cmd_optimize(Run& run, json& doc, bool maximizing) {
  const Graph graph = read_graph(run, "graph", run.value("graph"));
  const std::vector<double> row = parse_numbers(run.value("objective"), "objective");
  if (static_cast<int>(row.size()) != graph.output_dim()) {
    throw UsageError("--objective has " + std::to_string(row.size()) + " entries, graph output has " +
                     std::to_string(graph.output_dim()));
  }
  const Vector objective = Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size()));
  const Box box = parse_box_flag(run.value("box"), "box");
  require_dim(box, graph.input_dim(), "--box");
  std::optional<SpecCNF> constraints;
  if (run.given("constraints")) {
    constraints = read_spec(run, "constraints", run.value("constraints"));
    constraints->input_box = box;
    try {
      check_spec(*constraints, graph);
    } catch (const GraphError& e) {
      throw FormatError(run.value("constraints") + ": " + e.what());
    }
  }
  const OptConfig oc = opt_config(run.cfg);
  const SpecCNF* cons = constraints ? &*constraints : nullptr;
  const OptResult r = maximizing ? maximize(graph, objective, box, cons, oc) : minimize(graph, objective, box, cons, oc);

  doc = header(run);
  doc["config"] = config_echo(run, {"seed", "workers", "bound", "pgd", "bab", "opt"});
  doc["box"] = box_json(box);
  doc["objective"] = to_json(objective);
  doc["status"] = to_string(r.status);
  doc["x_best"] = r.has_incumbent ? to_json(r.x_best) : json(nullptr);
  doc["primal_value"] = r.has_incumbent ? json(r.primal_value) : json(nullptr);
  doc[maximizing ? "certified_upper" : "certified_lower"] = r.certified_bound;
  doc["gap"] = r.gap;
  json stats;
  stats["domains"] = r.stats.domains;
  stats["max_depth"] = r.stats.max_depth;
  stats["pruned_bound"] = r.stats.pruned_bound;
  stats["pruned_infeasible"] = r.stats.pruned_infeasible;
  if (run.timing()) stats["wall_time"] = r.stats.wall_time;
  doc["stats"] = std::move(stats);
  switch (r.status) {
    case OptStatus::OptimalWithinGap:
      return kOk;
    case OptStatus::Infeasible:
      return kFalsified;
    case OptStatus::BudgetExhausted:
      break;
  }
  return kUnknown;
}

std::vector<Vector> read_vertices(Run& run, const std::string& path) {
  const std::string text = run.read_input("vertices", path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("format_version", 0) != kFormatVersion) {
    throw FormatError(path + ": expected an object with format_version 1");
  }
  auto it = doc.find("vertices");
  if (it == doc.end() || !it->is_array()) throw FormatError(path + ": missing 'vertices' array");
  std::vector<Vector> out;
  for (const json& v : *it) {
    if (!v.is_array()) throw FormatError(path + ": each vertex must be an array of numbers");
    Vector x(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw FormatError(path + ": each vertex must be an array of numbers");
      x[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    out.push_back(std::move(x));
  }
  return out;
}

int cmd_certify(Run& run, json& doc) {
  const std::string kind = run.value("kind");
  static const char* kKinds[] = {"reach", "lyap-discrete", "lyap-continuous", "robust-roa", "contraction", "barrier"};
  bool known = false;
  for (const char* k : kKinds) known = known || kind == k;
  if (!known) throw UsageError("--kind: unknown certificate kind '" + kind + "'");

  const std::string path = run.value("system");
  const std::string text = run.read_input("system", path);
  BundleFile bundle;
  try {
    bundle = parse_bundle(text, std::filesystem::path(path).parent_path());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
  Box box;
  if (run.given("box")) {
    box = parse_box_flag(run.value("box"), "box");
  } else if (bundle.box) {
    box = *bundle.box;
  } else {
    throw UsageError("certify: no --box given and the bundle has none");
  }
  const LevelParams params = level_params(run.cfg);

  doc = header(run);
  json echo = config_echo(run, {"seed", "workers", "bound"});
  if (kind != "reach") {
    echo["pgd"] = run.cfg.at("pgd");
    echo["bab"] = run.cfg.at("bab");
  }
  echo["certify"] = run.cfg.at("certify");
  doc["config"] = std::move(echo);
  doc["kind"] = kind;
  doc["system"] = bundle.system.name;
  doc["box"] = box_json(box);

  try {
    if (kind == "reach") {
      const int steps = run.cfg.at("certify").at("steps").get<int>();
      const double ceiling = run.cfg.at("certify").at("ceiling").get<double>();
      const ReachTube tube = reach_tube(bundle.system, box, steps, ceiling, bound_mode(run.cfg));
      json lo = json::array();
      json hi = json::array();
      for (const ScalarBounds& s : tube.steps) {
        lo.push_back(to_json(s.lower));
        hi.push_back(to_json(s.upper));
      }
      doc["status"] = tube.diverged ? "diverged" : "bounded";
      doc["tube"] = {{"lower", std::move(lo)}, {"upper", std::move(hi)}};
      doc["diverged_at"] = tube.diverged ? json(tube.diverged_at) : json(nullptr);
      return tube.diverged ? kUnknown : kOk;
    }

    const CertificateProblem prob = [&] {
      if (kind == "lyap-discrete") return build_discrete_lyapunov(bundle.system, box, params);
      if (kind == "lyap-continuous") return build_continuous_lyapunov(bundle.system, box, params);
      if (kind == "robust-roa") {
        Box wbox;
        if (run.given("w-box")) {
          wbox = parse_box_flag(run.value("w-box"), "w-box");
        } else if (bundle.w_box) {
          wbox = *bundle.w_box;
        } else {
          throw UsageError("certify robust-roa: no --w-box given and the bundle has none");
        }
        return build_robust_roa(bundle.system, box, wbox, params);
      }
      if (kind == "contraction") return build_contraction(bundle.system, box, params);
      if (!run.given("vertices")) throw UsageError("certify barrier: --vertices is required");
      return build_barrier(bundle.system, box, params, read_vertices(run, run.value("vertices")));
    }();
    const VerifyResult r = verify(prob.graph, prob.spec, verify_config(run.cfg));
    json outputs;
    for (const auto& [name, range] : prob.layout) outputs[name] = {range.first, range.second};
    doc["outputs"] = std::move(outputs);
    doc["clauses"] = prob.spec.clauses.size();
    doc["status"] = to_string(r.status);
    if (kind == "contraction" && r.status == VerifyStatus::Verified) {
      doc["verified_rate"] = params.rate;
      doc["conclusion"] =
          "trajectories starting in the verified sublevel set contract toward each other at some rate "
          "strictly between the verified rate and 1";
    }
    if (r.counterexample) doc["counterexample"] = counterexample_json(*r.counterexample, prob.graph, &prob.layout);
    doc["stats"] = verify_stats(r.stats, run.timing());
    return status_code(r.status);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("certify ") + kind + ": " + e.what());
  } catch (const GraphError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

const CommandInfo* find_command(const std::string& name) {
  for (const CommandInfo& c : command_table()) {
    if (name == c.name) return &c;
  }
  return nullptr;
}

json load_config(Run& run) {
  json cfg = default_config();
  std::string path;
  if (run.given("config")) {
    path = run.value("config");
  } else if (const char* env = std::getenv(kConfigEnv); env && *env) {
    path = env;
  }
  if (!path.empty()) {
    const std::string text = run.read_input("config", path);
    json file;
    try {
      file = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(path + ": " + e.what());
    }
    merge_config_file(cfg, file, path);
  }
  for (const std::string& s : run.parsed->sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
    set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  const CommandInfo* info = find_command(run.command);
  const std::string budget = (info->id & kOptimize) ? "opt" : "bab";
  for (const Flag& f : flag_table()) {
    if (!f.key || !(f.commands & info->id) || !run.given(f.name)) continue;
    std::string key = f.key;
    if (auto pos = key.find("{budget}"); pos != std::string::npos) key.replace(pos, 8, budget);
    set_config_value(cfg, key, run.value(f.name));
  }
  if (run.parsed->switches["no-falsify"]) cfg["bab"]["falsify"] = false;
  check_config(cfg);
  return cfg;
}

}  // namespace

std::string help_text(const std::string& command) {
  Parsed p;
  auto app = build_app(p);
  if (command.empty()) return app->help();
  CLI::App* sub = app->get_subcommand(command);
  return sub->help();
}

std::vector<std::string> flag_names(const std::string& command) {
  const CommandInfo* info = find_command(command);
  std::vector<std::string> out;
  if (!info) return out;
  for (const Flag& f : flag_table()) {
    if (f.commands & info->id) out.push_back(std::string("--") + f.name);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Parsed parsed;
  auto app = build_app(parsed);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const std::string cmd = app->get_subcommands().empty() ? "" : app->get_subcommands().front()->get_name();
    out << help_text(cmd);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "boxcert: " << e.what() << "\n";
    err << "run 'boxcert --help' for usage\n";
    return kUsage;
  }

  Run run;
  run.command = app->get_subcommands().front()->get_name();
  run.parsed = &parsed;
  run.err = &err;
  try {
    run.cfg = load_config(run);
    json doc;
    int code = kOk;
    if (run.command == "bounds") {
      code = cmd_bounds(run, doc);
    } else if (run.command == "verify") {
      code = cmd_verify(run, doc);
    } else if (run.command == "minimize" || run.command == "maximize") {
      code = cmd_optimize(run, doc, run.command == "maximize");
    } else if (run.command == "certify") {
      code = cmd_certify(run, doc);
    } else {
      const std::filesystem::path dir = run.given("fixtures") ? std::filesystem::path(run.value("fixtures"))
                                                               : default_fixture_dir();
      code = run_selftest(dir, run.cfg, run.timing(), doc, err);
    }
    const std::string text = doc.dump(2) + "\n";
    if (run.given("out")) {
      write_text_file(run.value("out"), text);
    } else {
      out << text;
    }
    return code;
  } catch (const UsageError& e) {
    err << "boxcert " << run.command << ": " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "boxcert " << run.command << ": " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    err << "boxcert " << run.command << ": internal error: " << e.what() << "\n";
    return kInternal;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace boxcert::cli
