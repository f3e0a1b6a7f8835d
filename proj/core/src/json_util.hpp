#pragma once

// Private JSON helpers shared by the file-format readers.

#include "boxcert/graph.hpp"
#include "boxcert/graph_io.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace boxcert::detail {

using json = nlohmann::ordered_json;

json parse_json_text(const std::string& text);
void check_version(const json& doc, const std::string& what);

const json& require(const json& obj, const char* key, const std::string& path);
double as_number(const json& v, const std::string& path);
int as_int(const json& v, const std::string& path);
std::string as_string(const json& v, const std::string& path);
Vector as_vector(const json& v, const std::string& path);
Matrix as_matrix(const json& v, const std::string& path);

json to_json(const Vector& v);
json to_json(const Matrix& m);

GraphDef graph_from_json(const json& doc, const std::string& path);
json graph_to_json(const GraphDef& def);

}  // namespace boxcert::detail
