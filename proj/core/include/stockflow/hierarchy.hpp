#pragma once

#include <map>
#include <vector>

#include "stockflow/colimit.hpp"
#include "stockflow/decomposition.hpp"
#include "stockflow/surgery.hpp"

namespace sfd {

/// Where the corolla's half flows and stock-sourced links land in the
/// substituting diagram. up/down are keyed by ambient flow id (a flow has at
/// most one incidence of each kind), st by ambient link id.
struct AttachmentSpec {
  std::map<Id, Id> up;
  std::map<Id, Id> down;
  std::map<Id, Id> st;
};

struct Substitution {
  Id stock;
  DiagramPtr with;
  AttachmentSpec attach;
};

struct SubstitutionPlan {
  std::vector<Substitution> substitutions;
};

struct SubstitutionOptions {
  EqCheckConfig eq;
  bool allow_open = false;
};

/// The corolla re-rooted on Y's stocks. Throws Error{IncompleteAttachment}
/// (naming every unassigned item), Error{UnknownStock}, Error{InvalidConfig}
/// for attachment keys that match nothing, or Error{NotClosed}.
StockFlowDiagram extend_corolla(const Corolla& c, const StockFlowDiagram& Y,
                                const AttachmentSpec& a, bool allow_open = false);

struct SubstitutedCorolla {
  DiagramPtr extended;  // D
  DiagramPtr expanded;  // E, the pushout of D and Y over their shared stocks
  std::map<Id, DiagramMorphism> g_maps;  // corolla flow id -> (unit flow -> E)
};

SubstitutedCorolla substitute_corolla(const Corolla& c, const DiagramPtr& Y,
                                      const AttachmentSpec& a,
                                      const SubstitutionOptions& opts = {});

/// Colimit of El_/X with the planned corollas replaced by their expansions.
/// Throws Error{UnknownStock} or Error{InvalidConfig} (stock planned twice).
StockFlowDiagram hierarchical_expand(const StockFlowDiagram& X, const SubstitutionPlan& plan,
                                     const SubstitutionOptions& opts = {});

/// Splits in order, then the expansion. Errors carry a 1-based step index
/// (split k is step k, the expansion is step splits.size() + 1).
StockFlowDiagram pipeline(const StockFlowDiagram& X, const std::vector<SplitSpec>& splits,
                          const SubstitutionPlan& plan, const SubstitutionOptions& opts = {});

}  // namespace sfd
