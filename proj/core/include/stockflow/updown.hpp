#pragma once

#include <optional>

#include "stockflow/colimit.hpp"
#include "stockflow/surgery.hpp"

namespace sfd {

struct UpDownTriple {
  Id a;  // stock of X the flow leaves
  Id b;  // stock of Y the flow enters
  Id f;  // half outflow of X
};

/// The unit flow of f with one stock and an inflow incidence into it.
struct ReceiverStub {
  DiagramPtr diagram;
  Id stock;
  Id flow;
  Id incidence;
};

/// Throws Error{UnknownFlow}.
ReceiverStub receiver_stub(const StockFlowDiagram& X, const Id& f, const Id& stock = "*");

struct UpDownResult {
  DiagramPtr composite;  // after the optional update
  DiagramPtr glued;      // the last pushout, before any update
  DiagramPtr upstream;   // X glued with the stub along U_f
  DiagramPtr downstream; // Y glued with the stub along b
  DiagramMorphism from_x;     // X -> glued
  DiagramMorphism from_stub;  // stub -> glued
  DiagramMorphism from_y;     // Y -> glued
};

/// Docks the half outflow f of X onto stock b of Y with three pushouts. Ids of
/// X take precedence over ids of Y; clashing Y ids get a `~k` suffix. The
/// stub stock is named b. Throws Error{NotHalfOutflow}, Error{UnknownStock}
/// or Error{UnknownFlow}.
UpDownResult compose_updown(const StockFlowDiagram& X, const StockFlowDiagram& Y,
                            const UpDownTriple& T,
                            const std::optional<FlowUpdate>& post_update = std::nullopt,
                            const EqCheckConfig& cfg = {});

}  // namespace sfd
