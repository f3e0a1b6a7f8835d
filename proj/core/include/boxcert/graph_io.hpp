#pragma once

// On-disk graph format: a JSON document with a leading format_version,
// `inputs` (id, dim), `nodes` (id, op, parents, payload) and `output`.

#include "boxcert/graph.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace boxcert {

inline constexpr int kFormatVersion = 1;

/// Malformed or unsupported file content. Messages carry the field path and,
/// for syntax errors, the line and column.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GraphDef parse_graph(const std::string& text);
std::string serialize_graph(const GraphDef& def);

Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& graph, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace boxcert
