#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "stockflow/diagram.hpp"

namespace sfd::detail {

using nlohmann::json;

[[noreturn]] void format_error(const std::string& ptr, const std::string& message);

json parse_json(std::string_view text);

/// Rejects non-objects, unknown keys and missing required keys.
void expect_object(const json& j, const std::string& ptr,
                   std::initializer_list<const char*> required,
                   std::initializer_list<const char*> optional = {});

const json& expect_array(const json& j, const std::string& ptr);
std::string get_string(const json& j, const char* key, const std::string& ptr);
std::string as_string(const json& j, const std::string& ptr);
FlowExpr parse_fn(const std::string& src, const std::string& ptr);

StockFlowDiagram diagram_from_json(const json& j, const std::string& ptr);
json diagram_to_json(const StockFlowDiagram& X);

}  // namespace sfd::detail
