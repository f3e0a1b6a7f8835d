#include "boxcert/cli.hpp"
#include "boxcert/graph_io.hpp"
#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#ifndef BOXCERT_FIXTURE_DIR
#define BOXCERT_FIXTURE_DIR "fixtures"
#endif

namespace boxcert::cli {

std::filesystem::path default_fixture_dir() { return BOXCERT_FIXTURE_DIR; }

namespace {

const std::set<std::string> kFileFlags = {"--graph", "--spec", "--system", "--constraints", "--vertices"};

std::vector<std::string> resolve_args(const json& args, const std::filesystem::path& dir) {
  std::vector<std::string> out;
  bool file_next = false;
  for (const json& a : args) {
    std::string s = a.get<std::string>();
    if (file_next && std::filesystem::path(s).is_relative()) s = (dir / s).string();
    file_next = kFileFlags.count(s) != 0;
    out.push_back(std::move(s));
  }
  return out;
}

bool close_arrays(const json& got, const json& want, double tol, std::string& why, const std::string& what) {
  if (!got.is_array() || got.size() != want.size()) {
    why = what + ": shape differs";
    return false;
  }
  for (size_t i = 0; i < want.size(); ++i) {
    if (want[i].is_array()) {
      if (!close_arrays(got[i], want[i], tol, why, what)) return false;
      continue;
    }
    if (!got[i].is_number() || std::abs(got[i].get<double>() - want[i].get<double>()) > tol) {
      std::ostringstream os;
      os << what << "[" << i << "] = " << got[i].dump() << ", expected " << want[i].dump() << " +- " << tol;
      why = os.str();
      return false;
    }
  }
  return true;
}

/// Compares a result document with a manifest expectation; empty string
/// means pass.
std::string check_case(int code, const json& doc, const json& expect) {
  std::string why;
  if (expect.contains("exit") && code != expect["exit"].get<int>()) {
    return "exit code " + std::to_string(code) + ", expected " + expect["exit"].dump();
  }
  if (expect.contains("status") && doc.value("status", std::string()) != expect["status"].get<std::string>()) {
    return "status " + doc.value("status", std::string("<none>")) + ", expected " + expect["status"].get<std::string>();
  }
  if (auto b = expect.find("bounds"); b != expect.end()) {
    const double tol = (*b)["tol"].get<double>();
    if (!close_arrays(doc["bounds"]["lower"], (*b)["lower"], tol, why, "lower")) return why;
    if (!close_arrays(doc["bounds"]["upper"], (*b)["upper"], tol, why, "upper")) return why;
  }
  if (auto t = expect.find("tube"); t != expect.end()) {
    const double tol = (*t)["tol"].get<double>();
    if (!close_arrays(doc["tube"]["lower"], (*t)["lower"], tol, why, "tube lower")) return why;
    if (!close_arrays(doc["tube"]["upper"], (*t)["upper"], tol, why, "tube upper")) return why;
  }
  if (auto o = expect.find("optimum"); o != expect.end()) {
    const double tol = (*o)["tol"].get<double>();
    const double want = (*o)["value"].get<double>();
    const bool maximizing = doc.value("mode", std::string()) == "maximize";
    const json& primal = doc["primal_value"];
    if (!primal.is_number() || std::abs(primal.get<double>() - want) > tol) {
      return "primal_value " + primal.dump() + ", expected " + std::to_string(want);
    }
    const double bound = doc[maximizing ? "certified_upper" : "certified_lower"].get<double>();
    if (maximizing ? bound < want - tol : bound > want + tol) {
      return "certified bound " + std::to_string(bound) + " excludes the oracle optimum";
    }
  }
  return "";
}

}  // namespace

int run_selftest(const std::filesystem::path& dir, const json& cfg, bool timing, json& doc, std::ostream& err) {
  const std::filesystem::path manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_text_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format_version", 0) != kFormatVersion) {
    throw FormatError(manifest_path.string() + ": unsupported format_version");
  }
  const std::vector<std::string> shared = {"--workers", std::to_string(cfg.at("workers").get<int>()), "--seed",
                                           std::to_string(cfg.at("seed").get<long long>())};

  auto execute = [&](const json& args, json& result) {
    std::vector<std::string> argv = resolve_args(args, dir);
    if (argv.front() != "bounds") argv.insert(argv.end(), shared.begin(), shared.end());
    std::ostringstream out;
    std::ostringstream diag;
    const int code = run(argv, out, diag);
    try {
      result = json::parse(out.str());
    } catch (const json::parse_error&) {
      result = json::object();
    }
    if (!diag.str().empty()) err << diag.str();
    return code;
  };

  doc = json::object();
  doc["format_version"] = kFormatVersion;
  doc["mode"] = "selftest";
  doc["fixtures"] = dir.filename().string();
  doc["config"] = {{"seed", cfg.at("seed")}, {"workers", cfg.at("workers")}};
  json cases = json::array();
  int failed = 0;
  for (const json& c : manifest.at("cases")) {
    const auto t0 = std::chrono::steady_clock::now();
    json result;
    const int code = execute(c.at("args"), result);
    const std::string why = check_case(code, result, c.at("expect"));
    json entry;
    entry["name"] = c.at("name");
    entry["exit"] = code;
    if (result.contains("status")) entry["status"] = result["status"];
    entry["pass"] = why.empty();
    if (!why.empty()) entry["detail"] = why;
    if (timing) entry["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!why.empty()) ++failed;
    cases.push_back(std::move(entry));
  }
  doc["cases"] = std::move(cases);

  if (auto b = manifest.find("branching"); b != manifest.end()) {
    json naive;
    json smart;
    const int cn = execute((*b)["naive"], naive);
    const int cs = execute((*b)["smart"], smart);
    json rep;
    rep["naive_status"] = naive.value("status", std::string());
    rep["smart_status"] = smart.value("status", std::string());
    const long dn = naive.contains("stats") ? naive["stats"].value("domains", 0L) : 0L;
    const long ds = smart.contains("stats") ? smart["stats"].value("domains", 0L) : 0L;
    rep["naive_domains"] = dn;
    rep["smart_domains"] = ds;
    const double ratio = dn > 0 ? static_cast<double>(ds) / static_cast<double>(dn) : 0.0;
    rep["ratio"] = ratio;
    rep["max_ratio"] = (*b)["max_ratio"];
    const bool pass = cn == kOk && cs == kOk && dn > 0 && ratio <= (*b)["max_ratio"].get<double>();
    rep["pass"] = pass;
    if (!pass) ++failed;
    doc["branching"] = std::move(rep);
  }
  doc["failed"] = failed;
  return failed == 0 ? kOk : kFalsified;
}

}  // namespace boxcert::cli
