#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "stockflow/hierarchy.hpp"
#include "stockflow/surgery.hpp"
#include "stockflow/updown.hpp"

namespace sfd {

struct UpdownStep {
  DiagramPtr other;
  UpDownTriple triple;
  std::optional<FlowUpdate> update;  // stock is the triple's a
};

struct AddFlowStep {
  Id stock;
  FlowSide side;
  Id flow;
  std::vector<NewLink> links;
  FlowExpr fn;
};

using ScriptStep = std::variant<SplitSpec, Substitution, UpdownStep, FlowUpdate, AddFlowStep>;

/// Parses a JSON array of steps. A substitute step's "with" is an inline
/// diagram or a path resolved against base_dir. Throws Error{Format} (with
/// the step's JSON pointer) or the diagram loading errors.
std::vector<ScriptStep> parse_script(std::string_view text,
                                     const std::filesystem::path& base_dir = {});
std::vector<ScriptStep> load_script(const std::filesystem::path& path);

/// Runs the steps in order; consecutive substitute steps form one
/// substitution plan. Errors carry the 1-based index of the failing step.
StockFlowDiagram run_script(const StockFlowDiagram& X, const std::vector<ScriptStep>& steps,
                            const SubstitutionOptions& opts = {});

}  // namespace sfd
