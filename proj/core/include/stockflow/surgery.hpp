#pragma once

#include <optional>
#include <vector>

#include "stockflow/decomposition.hpp"

namespace sfd {

struct SplitPart {
  Id id;
  FlowExpr fn;  // over the links of the flow being split
};

struct SplitSpec {
  Id flow;
  std::vector<SplitPart> parts;
};

struct CorollaSplit {
  Corolla corolla;
  DiagramMorphism collapse;  // new corolla -> old corolla, parts onto the split flow
};

/// Splits every copy of spec.flow in the corolla. Part i of a copy with
/// incidence `inc` gets incidence `inc@id_i`, links `l@id_i` and CTLinks
/// `ct@id_i`. Throws SumMismatchError, Error{DuplicateFlowId},
/// Error{UnknownFlow} or Error{ForeignLink}.
CorollaSplit split_flow_in_corolla(const Corolla& c, const SplitSpec& spec,
                                   const EqCheckConfig& cfg = {});

/// Splits the flow in every corolla it touches and recomposes with unit flows
/// for the parts. Throws as split_flow_in_corolla.
StockFlowDiagram split_flow(const StockFlowDiagram& X, const SplitSpec& spec,
                            const EqCheckConfig& cfg = {});

struct FlowUpdate {
  Id stock;
  Id flow;
  std::vector<Id> links;  // retained links, a subset of the flow's links
  FlowExpr fn;            // over the retained links
};

/// Replaces the flow's function and drops the links outside `links` (with
/// their CTLinks) in every copy of the flow. Throws Error{UnknownStock},
/// Error{UnknownFlow} or Error{ForeignLink}.
StockFlowDiagram update_flow(const StockFlowDiagram& X, const FlowUpdate& u,
                             const EqCheckConfig& cfg = {});

struct NewLink {
  Id id;
  std::optional<Id> source;  // stock the link reads, or none for a half link
};

/// Adds a half flow at s (side In or Out) as a new summand of s's corolla.
/// Throws Error{DuplicateFlowId}, Error{DuplicateId}, Error{UnknownStock},
/// Error{ForeignLink} or Error{InvalidConfig} for side Reference.
StockFlowDiagram add_flow(const StockFlowDiagram& X, const Id& s, FlowSide side,
                          const Id& new_flow, const std::vector<NewLink>& links, const FlowExpr& fn,
                          const EqCheckConfig& cfg = {});

}  // namespace sfd
