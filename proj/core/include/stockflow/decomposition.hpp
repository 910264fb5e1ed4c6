#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stockflow/colimit.hpp"
#include "stockflow/diagram.hpp"

namespace sfd {

/// How a corolla flow meets the corolla's stock. Reference copies carry no
/// incidence: they exist so that links sourced at the stock but feeding a
/// flow elsewhere have somewhere to point.
enum class FlowSide : std::uint8_t { In, Out, Reference };

std::string_view to_string(FlowSide side);

struct CorollaFlow {
  Id id;            // flow id inside the corolla
  Id ambient_flow;  // the flow of the ambient diagram it copies
  FlowSide side;
  std::optional<Id> incidence;
  std::vector<std::pair<Id, Id>> links;  // (corolla link id, ambient link id)
};

struct Corolla {
  DiagramPtr diagram;
  Id stock;
  std::vector<CorollaFlow> flows;

  const CorollaFlow& flow(const Id& id) const;
};

struct UnitFlow {
  DiagramPtr diagram;
  Id flow;
};

/// Copies are named `<incidence>#in` / `<incidence>#out` / `<flow>#ref`.
/// Link ids are kept; the second copy of a self-flow gets `<link>#out`.
/// Throws Error{UnknownStock}.
Corolla corolla(const StockFlowDiagram& X, const Id& s);

/// Throws Error{UnknownFlow}.
UnitFlow unit_flow(const StockFlowDiagram& X, const Id& f);

/// Unit flows (flow order) followed by corollas (stock order), one arrow
/// U_f -> C_s per copy of f in C_s.
ElDiagram elements_category(const StockFlowDiagram& X);

/// The El-shaped diagram over the given pieces: an arrow from the unit flow of
/// each corolla flow's ambient flow into the corolla. Throws
/// Error{InvalidDiagram} when a corolla refers to a flow with no unit flow.
ElDiagram assemble_el(const std::vector<UnitFlow>& units, const std::vector<Corolla>& corollas);

/// colimit_el of an elements-shaped diagram.
StockFlowDiagram recompose(const ElDiagram& d, const EqCheckConfig& cfg = {});

struct PartLink {
  Id local;
  Id ambient;
  std::optional<Id> ctlink;  // present iff the link is sourced at the part's stock
};

/// One stock, one flow, at most one incidence (none for reference copies).
struct SingleFlowPart {
  Id stock;
  Id flow;
  Id ambient_flow;
  FlowSide side;
  std::optional<Id> incidence;
  std::vector<PartLink> links;
  FlowExpr fn;  // over local link ids
  DiagramPtr diagram;
};

/// Builds the part's diagram from its description.
SingleFlowPart make_part(Id stock, Id flow, Id ambient_flow, FlowSide side,
                         std::optional<Id> incidence, std::vector<PartLink> links, FlowExpr fn);

struct PartsDecomposition {
  std::vector<SingleFlowPart> parts;
  ElDiagram gluing;  // object 0 is disc({stock}); one arrow into each part
};

PartsDecomposition single_flow_parts(const Corolla& c);

/// The gluing diagram for a stock and a list of parts.
ElDiagram parts_gluing(const Id& stock, const std::vector<SingleFlowPart>& parts);

/// Colimit of parts_gluing, with the corolla bookkeeping rebuilt from the
/// parts. Throws Error{DuplicateId} if two parts share a flow, incidence,
/// link or CTLink id.
Corolla glue_parts(const Id& stock, const std::vector<SingleFlowPart>& parts,
                   const EqCheckConfig& cfg = {});

}  // namespace sfd
