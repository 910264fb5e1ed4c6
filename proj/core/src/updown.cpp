#include "stockflow/updown.hpp"

#include "stockflow/decomposition.hpp"
#include "stockflow/error.hpp"

namespace sfd {

ReceiverStub receiver_stub(const StockFlowDiagram& X, const Id& f, const Id& stock) {
  UnitFlow u = unit_flow(X, f);
  PrimitiveDiagram prim = u.diagram->prim();
  prim.add_stock(stock);
  prim.add_inflow(f, f, stock);
  DiagramPtr d = share(make_diagram(std::move(prim), u.diagram->flow_fns()));
  return ReceiverStub{d, stock, f, f};
}

namespace {

DiagramMorphism unit_into(const DiagramPtr& unit, const DiagramPtr& target, const Id& f) {
  DiagramMorphism F(unit, target);
  F.component(SchemaObject::Flow).set(f, f);
  for (const auto& l : unit->links()) F.component(SchemaObject::Link).set(l, l);
  return F;
}

}  // namespace

UpDownResult compose_updown(const StockFlowDiagram& X, const StockFlowDiagram& Y,
                            const UpDownTriple& T, const std::optional<FlowUpdate>& post_update,
                            const EqCheckConfig& cfg) {
  const PrimitiveDiagram& p = X.prim();
  if (!X.flows().contains(T.f)) throw Error(ErrorKind::UnknownFlow, "no flow '" + T.f + "'");
  if (!X.stocks().contains(T.a)) throw Error(ErrorKind::UnknownStock, "no stock '" + T.a + "'");
  if (!Y.stocks().contains(T.b))
    throw Error(ErrorKind::UnknownStock, "downstream diagram has no stock '" + T.b + "'");
  if (p.inflow_of(T.f) || p.upstream_stock(T.f) != T.a)
    throw Error(ErrorKind::NotHalfOutflow,
                "'" + T.f + "' is not a half outflow of '" + T.a + "'");

  DiagramPtr x = share(X);
  DiagramPtr y = share(Y);
  DiagramPtr unit = unit_flow(X, T.f).diagram;
  ReceiverStub stub = receiver_stub(X, T.f, T.b);

  PushoutResult B = presheaf_pushout(
      SpanOfDiagrams{unit, unit_into(unit, x, T.f), unit_into(unit, stub.diagram, T.f)}, cfg);

  DiagramPtr point = share(disc({T.b}));
  DiagramMorphism pick_b(point, y);
  pick_b.component(SchemaObject::Stock).set(T.b, T.b);
  DiagramMorphism pick_stub(point, stub.diagram);
  pick_stub.component(SchemaObject::Stock).set(T.b, stub.stock);
  PushoutResult A = presheaf_pushout(SpanOfDiagrams{point, pick_b, pick_stub}, cfg);

  PushoutResult C = presheaf_pushout(SpanOfDiagrams{stub.diagram, B.p2, A.p2}, cfg);

  UpDownResult out{C.apex,
                   C.apex,
                   B.apex,
                   A.apex,
                   compose(B.p1, C.p1),
                   compose(B.p2, C.p1),
                   compose(A.p1, C.p2)};
  out.from_x.certify(cfg);
  out.from_stub.certify(cfg);
  out.from_y.certify(cfg);
  if (post_update) out.composite = share(update_flow(*C.apex, *post_update, cfg));
  return out;
}

}  // namespace sfd
