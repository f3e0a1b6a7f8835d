#include "config.hpp"

#include "boxcert/graph_io.hpp"

#include <charconv>
#include <sstream>

namespace boxcert::cli {

json default_config() {
  json cfg;
  cfg["seed"] = 20240607;
  cfg["workers"] = 1;
  cfg["bound"] = {{"mode", "crown"}};
  cfg["pgd"] = {{"restarts", 5}, {"steps", 100}, {"step_size", 0.1}, {"batch", 64}};
  cfg["bab"] = {{"timeout", 360.0},
                {"max_domains", 200000},
                {"batch", 64},
                {"branching", "smart"},
                {"tolerance", 1e-9},
                {"min_width", 1e-12},
                {"falsify", true},
                {"sub_pgd_restarts", 1},
                {"sub_pgd_steps", 30},
                {"sub_pgd_batch", 8}};
  cfg["opt"] = {{"gap_tol", 1e-3},
                {"timeout", 360.0},
                {"max_domains", 200000},
                {"batch", 16},
                {"branching", "smart"},
                {"pgd_restarts", 3},
                {"pgd_steps", 60},
                {"pgd_batch", 16}};
  cfg["certify"] = {{"rho", 1.0},   {"c1", 0.0},   {"c2", 0.0},       {"kappa", 0.5},
                    {"alpha", 1.0}, {"nu", 0.0},   {"epsilon", 0.1},  {"rate", 0.9},
                    {"tol", 1e-6},  {"steps", 3},  {"ceiling", 1000.0}};
  return cfg;
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !a.is_number_integer() || b.is_number_integer();
  return a.type() == b.type();
}

void merge(json& dst, const json& src, const std::string& path, const std::string& origin) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "/" + it.key();
    if (path.empty() && it.key() == "format_version") continue;
    auto d = dst.find(it.key());
    if (d == dst.end()) throw FormatError(origin + ": unknown config key '" + key + "'");
    if (d->is_object()) {
      if (!it->is_object()) throw FormatError(origin + ": '" + key + "' must be an object");
      merge(*d, *it, key, origin);
    } else {
      if (!same_kind(*d, *it)) throw FormatError(origin + ": '" + key + "' has the wrong type");
      if (d->is_number_float()) {
        *d = it->get<double>();
      } else {
        *d = *it;
      }
    }
  }
}

}  // namespace

void merge_config_file(json& cfg, const json& file, const std::string& origin) {
  if (!file.is_object()) throw FormatError(origin + ": config must be a JSON object");
  auto v = file.find("format_version");
  if (v == file.end()) throw FormatError(origin + ": missing format_version");
  if (!v->is_number_integer() || v->get<int>() != kFormatVersion) {
    throw FormatError(origin + ": unsupported format_version");
  }
  merge(cfg, file, "", origin);
}

void set_config_value(json& cfg, const std::string& path, const std::string& text) {
  json* node = &cfg;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!node->is_object() || !node->contains(part)) {
      throw UsageError("unknown config key '" + path + "'");
    }
    node = &(*node)[part];
  }
  if (node->is_object()) throw UsageError("config key '" + path + "' is a section");
  auto bad = [&] { return UsageError("config key '" + path + "': cannot use value '" + text + "'"); };
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (node->is_boolean()) {
    if (text == "true" || text == "1") {
      *node = true;
    } else if (text == "false" || text == "0") {
      *node = false;
    } else {
      throw bad();
    }
  } else if (node->is_number_integer()) {
    long long v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) throw bad();
    *node = v;
  } else if (node->is_number()) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) throw bad();
    *node = v;
  } else {
    *node = text;
  }
}

namespace {

void positive(const json& cfg, const char* section, const char* key) {
  const json& v = section ? cfg.at(section).at(key) : cfg.at(key);
  if (!(v.get<double>() > 0)) {
    throw UsageError(std::string(section ? std::string(section) + "/" : "") + key + " must be positive");
  }
}

Branching branching(const json& v, const char* key) {
  auto b = branching_from_string(v.get<std::string>());
  if (!b) throw UsageError(std::string(key) + " must be 'naive' or 'smart'");
  return *b;
}

}  // namespace

void check_config(const json& cfg) {
  positive(cfg, nullptr, "workers");
  if (cfg.at("seed").get<long long>() < 0) throw UsageError("seed must be non-negative");
  bound_mode(cfg);
  for (const char* k : {"restarts", "steps", "step_size", "batch"}) positive(cfg, "pgd", k);
  for (const char* k : {"timeout", "max_domains", "batch", "sub_pgd_restarts", "sub_pgd_steps", "sub_pgd_batch",
                        "min_width"}) {
    positive(cfg, "bab", k);
  }
  if (cfg.at("bab").at("tolerance").get<double>() < 0) throw UsageError("bab/tolerance must be non-negative");
  branching(cfg.at("bab").at("branching"), "bab/branching");
  for (const char* k : {"gap_tol", "timeout", "max_domains", "batch", "pgd_restarts", "pgd_steps", "pgd_batch"}) {
    positive(cfg, "opt", k);
  }
  branching(cfg.at("opt").at("branching"), "opt/branching");
  for (const char* k : {"steps", "ceiling"}) positive(cfg, "certify", k);
  if (cfg.at("certify").at("tol").get<double>() < 0) throw UsageError("certify/tol must be non-negative");
}

BoundMode bound_mode(const json& cfg) {
  const std::string m = cfg.at("bound").at("mode").get<std::string>();
  if (m == "crown") return BoundMode::CROWN;
  if (m == "ibp") return BoundMode::IBP;
  throw UsageError("bound/mode must be 'crown' or 'ibp'");
}

VerifyConfig verify_config(const json& cfg) {
  const json& b = cfg.at("bab");
  const json& p = cfg.at("pgd");
  VerifyConfig v;
  v.timeout = b.at("timeout").get<double>();
  v.max_domains = b.at("max_domains").get<long>();
  v.batch = b.at("batch").get<int>();
  v.branching = branching(b.at("branching"), "bab/branching");
  v.tolerance = b.at("tolerance").get<double>();
  v.min_width = b.at("min_width").get<double>();
  v.falsify = b.at("falsify").get<bool>();
  v.workers = cfg.at("workers").get<int>();
  v.mode = bound_mode(cfg);
  v.pgd.restarts = p.at("restarts").get<int>();
  v.pgd.steps = p.at("steps").get<int>();
  v.pgd.step_size = p.at("step_size").get<double>();
  v.pgd.batch = p.at("batch").get<int>();
  v.pgd.seed = cfg.at("seed").get<std::uint64_t>();
  v.pgd.workers = v.workers;
  v.sub_pgd.restarts = b.at("sub_pgd_restarts").get<int>();
  v.sub_pgd.steps = b.at("sub_pgd_steps").get<int>();
  v.sub_pgd.batch = b.at("sub_pgd_batch").get<int>();
  v.sub_pgd.step_size = v.pgd.step_size;
  v.sub_pgd.seed = v.pgd.seed;
  return v;
}

OptConfig opt_config(const json& cfg) {
  const json& o = cfg.at("opt");
  OptConfig c;
  c.gap_tol = o.at("gap_tol").get<double>();
  c.timeout = o.at("timeout").get<double>();
  c.max_domains = o.at("max_domains").get<long>();
  c.batch = o.at("batch").get<int>();
  c.branching = branching(o.at("branching"), "opt/branching");
  c.min_width = cfg.at("bab").at("min_width").get<double>();
  c.workers = cfg.at("workers").get<int>();
  c.mode = bound_mode(cfg);
  c.pgd.restarts = o.at("pgd_restarts").get<int>();
  c.pgd.steps = o.at("pgd_steps").get<int>();
  c.pgd.batch = o.at("pgd_batch").get<int>();
  c.pgd.step_size = cfg.at("pgd").at("step_size").get<double>();
  c.pgd.seed = cfg.at("seed").get<std::uint64_t>();
  c.pgd.workers = c.workers;
  c.sub_pgd.seed = c.pgd.seed;
  c.sub_pgd.step_size = c.pgd.step_size;
  return c;
}

LevelParams level_params(const json& cfg) {
  const json& c = cfg.at("certify");
  LevelParams p;
  p.rho = c.at("rho").get<double>();
  p.c1 = c.at("c1").get<double>();
  p.c2 = c.at("c2").get<double>();
  p.kappa = c.at("kappa").get<double>();
  p.alpha = c.at("alpha").get<double>();
  p.nu = c.at("nu").get<double>();
  p.epsilon = c.at("epsilon").get<double>();
  p.rate = c.at("rate").get<double>();
  p.tol = c.at("tol").get<double>();
  return p;
}

}  // namespace boxcert::cli
