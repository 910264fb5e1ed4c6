#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stockflow/diagram.hpp"

namespace sfd {

/// Canonical diagram file text: sorted keys, two-space indent, trailing newline.
/// Incidence and CTLink ids are not stored.
std::string to_json(const StockFlowDiagram& X);

/// Inflow/outflow incidences are named after their flow and CTLinks after
/// their link. Throws Error{Format} (with a JSON pointer), Error{Syntax},
/// Error{DuplicateId} or Error{InvalidDiagram}.
StockFlowDiagram from_json(std::string_view text, const std::string& origin = "<input>");

/// Throws Error{Io} in addition to the from_json errors.
StockFlowDiagram load(const std::filesystem::path& path);
void save(const StockFlowDiagram& X, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// A file {"diagram": <diagram file>, "map": {"Stock": {...}, "Flow": {...},
/// "Link": {...}, ...}} read as a morphism from `source` into the diagram.
/// Missing Inflow/Outflow/CTLink components are induced.
DiagramMorphism morphism_from_json(std::string_view text, const DiagramPtr& source,
                                   const std::string& origin = "<input>");
DiagramMorphism load_morphism(const std::filesystem::path& path, const DiagramPtr& source);

/// Graphviz rendering: stocks are boxes, each flow is a bold edge through a
/// midpoint node (to or from a cloud where an end is missing), links are thin
/// edges into the midpoint node. Edges and nodes carry a class attribute
/// (flow, flow-tail, link, cloud).
std::string export_dot(const StockFlowDiagram& X);

}  // namespace sfd
