#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "bethe/graph.hpp"

namespace bethe::detail {

std::string read_text_file(const std::string& path);

/// Parses JSON; syntax errors become ParseError carrying the 1-based line.
nlohmann::json parse_json(std::string_view text, std::string_view source);

Graph graph_from_json(const nlohmann::json& j, std::string_view source);
nlohmann::json graph_to_json_value(const Graph& g);

}  // namespace bethe::detail
