#include "stockflow/decomposition.hpp"

#include <unordered_set>

#include "stockflow/error.hpp"

namespace sfd {

std::string_view to_string(FlowSide side) {
  switch (side) {
    case FlowSide::In: return "in";
    case FlowSide::Out: return "out";
    case FlowSide::Reference: return "ref";
  }
  return "?";
}

const CorollaFlow& Corolla::flow(const Id& id) const {
  for (const auto& f : flows)
    if (f.id == id) return f;
  throw Error(ErrorKind::UnknownFlow, "corolla of '" + stock + "' has no flow '" + id + "'");
}

namespace {

std::unordered_map<Id, Id> ambient_to_local(const CorollaFlow& cf) {
  std::unordered_map<Id, Id> m;
  for (const auto& [local, ambient] : cf.links) m.emplace(ambient, local);
  return m;
}

}  // namespace

Corolla corolla(const StockFlowDiagram& X, const Id& s) {
  const PrimitiveDiagram& p = X.prim();
  if (!X.stocks().contains(s))
    throw Error(ErrorKind::UnknownStock, "no stock '" + s + "'");

  Corolla c;
  c.stock = s;
  PrimitiveDiagram prim;
  prim.add_stock(s);
  std::unordered_map<Id, FlowExpr> fns;
  std::unordered_set<Id> used_links;

  auto add_copy = [&](const Id& copy, const Id& f, FlowSide side, std::optional<Id> inc) {
    CorollaFlow cf{copy, f, side, inc, {}};
    prim.add_flow(copy);
    if (side == FlowSide::In) prim.add_inflow(*inc, copy, s);
    if (side == FlowSide::Out) prim.add_outflow(*inc, copy, s);
    std::unordered_map<Id, Id> rename;
    for (const auto& l : p.links_of(f)) {
      Id local = l;
      while (used_links.count(local) != 0) local += "#" + std::string(to_string(side));
      used_links.insert(local);
      prim.add_link(local, copy);
      cf.links.emplace_back(local, l);
      rename.emplace(l, local);
    }
    fns.emplace(copy, precompose(X.flow_fn(f), rename));
    c.flows.push_back(std::move(cf));
  };

  for (const auto& i : p.preimage(SchemaArrow::Down, s))
    add_copy(i + "#in", p.apply(SchemaArrow::In, i), FlowSide::In, i);
  for (const auto& o : p.preimage(SchemaArrow::Up, s))
    add_copy(o + "#out", p.apply(SchemaArrow::Out, o), FlowSide::Out, o);

  for (const auto& ct : p.preimage(SchemaArrow::St, s)) {
    const Id& l = p.apply(SchemaArrow::Ct, ct);
    const Id& g = p.apply(SchemaArrow::Fl, l);
    const CorollaFlow* host = nullptr;
    for (const auto& cf : c.flows)
      if (cf.ambient_flow == g) {
        host = &cf;
        break;
      }
    if (host == nullptr) {
      add_copy(g + "#ref", g, FlowSide::Reference, std::nullopt);
      host = &c.flows.back();
    }
    prim.add_ctlink(ct, ambient_to_local(*host).at(l), s);
  }

  c.diagram = share(make_diagram(std::move(prim), std::move(fns)));
  return c;
}

UnitFlow unit_flow(const StockFlowDiagram& X, const Id& f) {
  if (!X.flows().contains(f)) throw Error(ErrorKind::UnknownFlow, "no flow '" + f + "'");
  PrimitiveDiagram prim;
  prim.add_flow(f);
  for (const auto& l : X.prim().links_of(f)) prim.add_link(l, f);
  return UnitFlow{share(make_diagram(std::move(prim), {{f, X.flow_fn(f)}})), f};
}

ElDiagram assemble_el(const std::vector<UnitFlow>& units, const std::vector<Corolla>& corollas) {
  ElDiagram d;
  std::unordered_map<Id, std::size_t> unit_index;
  for (const auto& u : units) unit_index.emplace(u.flow, d.add_object("U:" + u.flow, u.diagram));
  for (const auto& c : corollas) {
    std::size_t target = d.add_object("C:" + c.stock, c.diagram);
    for (const auto& cf : c.flows) {
      auto it = unit_index.find(cf.ambient_flow);
      if (it == unit_index.end())
        throw Error(ErrorKind::InvalidDiagram,
                    "corolla of '" + c.stock + "' copies flow '" + cf.ambient_flow +
                        "' which has no unit flow");
      const UnitFlow& u = units[it->second];
      DiagramMorphism F(u.diagram, c.diagram);
      F.component(SchemaObject::Flow).set(u.flow, cf.id);
      auto rename = ambient_to_local(cf);
      for (const auto& l : u.diagram->links()) {
        auto r = rename.find(l);
        if (r == rename.end())
          throw Error(ErrorKind::InvalidDiagram, "copy '" + cf.id + "' in the corolla of '" +
                                                     c.stock + "' lacks link '" + l + "'");
        F.component(SchemaObject::Link).set(l, r->second);
      }
      d.add_arrow(it->second, target, std::move(F));
    }
  }
  return d;
}

ElDiagram elements_category(const StockFlowDiagram& X) {
  std::vector<UnitFlow> units;
  for (const auto& f : X.flows()) units.push_back(unit_flow(X, f));
  std::vector<Corolla> corollas;
  for (const auto& s : X.stocks()) corollas.push_back(corolla(X, s));
  return assemble_el(units, corollas);
}

StockFlowDiagram recompose(const ElDiagram& d, const EqCheckConfig& cfg) {
  return *colimit_el(d, cfg).apex;
}

SingleFlowPart make_part(Id stock, Id flow, Id ambient_flow, FlowSide side,
                         std::optional<Id> incidence, std::vector<PartLink> links, FlowExpr fn) {
  PrimitiveDiagram prim;
  prim.add_stock(stock);
  prim.add_flow(flow);
  if (side == FlowSide::In) prim.add_inflow(*incidence, flow, stock);
  if (side == FlowSide::Out) prim.add_outflow(*incidence, flow, stock);
  for (const auto& pl : links) {
    prim.add_link(pl.local, flow);
    if (pl.ctlink) prim.add_ctlink(*pl.ctlink, pl.local, stock);
  }
  DiagramPtr diagram = share(make_diagram(std::move(prim), {{flow, fn}}));
  return SingleFlowPart{std::move(stock),     std::move(flow),  std::move(ambient_flow),
                        side,                 std::move(incidence), std::move(links),
                        std::move(fn),        std::move(diagram)};
}

ElDiagram parts_gluing(const Id& stock, const std::vector<SingleFlowPart>& parts) {
  ElDiagram d;
  DiagramPtr point = share(disc({stock}));
  std::size_t root = d.add_object("disc:" + stock, point);
  for (const auto& part : parts) {
    std::size_t k = d.add_object("part:" + part.flow, part.diagram);
    DiagramMorphism F(point, part.diagram);
    F.component(SchemaObject::Stock).set(stock, part.stock);
    d.add_arrow(root, k, std::move(F));
  }
  return d;
}

PartsDecomposition single_flow_parts(const Corolla& c) {
  const PrimitiveDiagram& p = c.diagram->prim();
  PartsDecomposition out;
  for (const auto& cf : c.flows) {
    std::vector<PartLink> links;
    for (const auto& [local, ambient] : cf.links) links.push_back({local, ambient, p.ctlink_of(local)});
    out.parts.push_back(make_part(c.stock, cf.id, cf.ambient_flow, cf.side, cf.incidence,
                                  std::move(links), c.diagram->flow_fn(cf.id)));
  }
  out.gluing = parts_gluing(c.stock, out.parts);
  return out;
}

Corolla glue_parts(const Id& stock, const std::vector<SingleFlowPart>& parts,
                   const EqCheckConfig& cfg) {
  ColimitResult r = colimit_el(parts_gluing(stock, parts), cfg);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const DiagramMorphism& leg = r.legs[k + 1];
    for (SchemaObject o : kSchemaObjects)
      for (const auto& x : parts[k].diagram->prim().carrier(o))
        if (o != SchemaObject::Stock && leg(o, x) != x)
          throw Error(ErrorKind::DuplicateId, std::string(to_string(o)) + " id '" + x +
                                                  "' occurs in more than one part at '" + stock +
                                                  "'");
  }
  Corolla c;
  c.diagram = r.apex;
  c.stock = stock;
  for (const auto& part : parts) {
    CorollaFlow cf{part.flow, part.ambient_flow, part.side, part.incidence, {}};
    for (const auto& pl : part.links) cf.links.emplace_back(pl.local, pl.ambient);
    c.flows.push_back(std::move(cf));
  }
  return c;
}

}  // namespace sfd
