#pragma once

// System bundle files: named graph fragments with roles (dynamics,
// controller, certificate, disturbance, metric) and optional default boxes.

#include "boxcert/control.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace boxcert {

struct BundleFile {
  SystemBundle system;
  std::optional<Box> box;    // state domain
  std::optional<Box> w_box;  // disturbance domain
};

/// Fragments are inline graph objects or {"file": path} references resolved
/// against `base_dir`.
BundleFile parse_bundle(const std::string& text, const std::filesystem::path& base_dir = {});
std::string serialize_bundle(const BundleFile& bundle);
BundleFile load_bundle(const std::filesystem::path& path);

}  // namespace boxcert
