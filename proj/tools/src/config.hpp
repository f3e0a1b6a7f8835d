#pragma once

// Layered run configuration: built-in defaults, then a JSON config file,
// then --set overrides, then dedicated flags. The effective document is
// echoed into every result.

#include "boxcert/bab.hpp"
#include "boxcert/control.hpp"
#include "boxcert/optimize.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace boxcert::cli {

using json = nlohmann::ordered_json;

/// Bad command line or configuration value; maps to the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "BOXCERT_CONFIG";

json default_config();

/// Overlays a parsed config file. Unknown keys and type mismatches throw
/// FormatError.
void merge_config_file(json& cfg, const json& file, const std::string& origin);

/// Sets one leaf addressed by a slash path ("bab/timeout") from text,
/// converting to the leaf's type. Throws UsageError on unknown paths or
/// unconvertible values.
void set_config_value(json& cfg, const std::string& path, const std::string& text);

/// Range checks on the effective configuration.
void check_config(const json& cfg);

BoundMode bound_mode(const json& cfg);
VerifyConfig verify_config(const json& cfg);
OptConfig opt_config(const json& cfg);
LevelParams level_params(const json& cfg);

}  // namespace boxcert::cli
