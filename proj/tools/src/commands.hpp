#pragma once

#include "config.hpp"

#include <filesystem>
#include <iosfwd>

namespace boxcert::cli {

json to_json(const Vector& v);
json to_json(const Matrix& m);

/// Runs every case of <dir>/manifest.json through run() and fills `doc`
/// with the report. Returns 0 when every case passes, 1 otherwise.
int run_selftest(const std::filesystem::path& dir, const json& cfg, bool timing, json& doc, std::ostream& err);

}  // namespace boxcert::cli
