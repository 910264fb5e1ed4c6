#include "stockflow/hierarchy.hpp"

#include <functional>
#include <set>
#include <sstream>

#include "stockflow/error.hpp"

namespace sfd {

namespace {

UnitFlow unit_from_copy(const Corolla& c, const CorollaFlow& cf) {
  PrimitiveDiagram prim;
  prim.add_flow(cf.ambient_flow);
  std::unordered_map<Id, Id> to_ambient;
  for (const auto& [local, ambient] : cf.links) {
    prim.add_link(ambient, cf.ambient_flow);
    to_ambient.emplace(local, ambient);
  }
  FlowExpr fn = precompose(c.diagram->flow_fn(cf.id), to_ambient);
  return UnitFlow{share(make_diagram(std::move(prim), {{cf.ambient_flow, fn}})), cf.ambient_flow};
}

// U_f -> D, sending f to the copy and ambient links to corolla links.
DiagramMorphism copy_inclusion(const DiagramPtr& unit, const CorollaFlow& cf,
                               const DiagramPtr& target) {
  DiagramMorphism F(unit, target);
  F.component(SchemaObject::Flow).set(cf.ambient_flow, cf.id);
  for (const auto& [local, ambient] : cf.links) F.component(SchemaObject::Link).set(ambient, local);
  return F;
}

using UnitLookup = std::function<DiagramPtr(const Corolla&, const CorollaFlow&)>;

SubstitutedCorolla substitute_impl(const Corolla& c, const DiagramPtr& Y, const AttachmentSpec& a,
                                   const SubstitutionOptions& opts, const UnitLookup& unit_for) {
  SubstitutedCorolla out;
  out.extended = share(extend_corolla(c, *Y, a, opts.allow_open));

  DiagramPtr apex = share(disc(Y->stocks().ids()));
  DiagramMorphism to_d(apex, out.extended);
  DiagramMorphism to_y(apex, Y);
  for (const auto& s : Y->stocks()) {
    to_d.component(SchemaObject::Stock).set(s, s);
    to_y.component(SchemaObject::Stock).set(s, s);
  }
  PushoutResult po = presheaf_pushout(SpanOfDiagrams{apex, to_d, to_y}, opts.eq);
  out.expanded = po.apex;

  for (const auto& cf : c.flows) {
    DiagramMorphism g = compose(copy_inclusion(unit_for(c, cf), cf, out.extended), po.p1);
    g.certify(opts.eq);
    out.g_maps.emplace(cf.id, std::move(g));
  }
  return out;
}

}  // namespace

StockFlowDiagram extend_corolla(const Corolla& c, const StockFlowDiagram& Y,
                                const AttachmentSpec& a, bool allow_open) {
  if (!allow_open && !is_closed(Y.prim()))
    throw Error(ErrorKind::NotClosed, "substituting diagram for '" + c.stock + "' is not closed");
  const PrimitiveDiagram& cp = c.diagram->prim();

  std::vector<std::string> missing;
  std::set<Id> used_up, used_down, used_st;
  auto lookup = [&](const std::map<Id, Id>& m, std::set<Id>& used, const Id& key,
                    const std::string& what) -> std::optional<Id> {
    auto it = m.find(key);
    if (it == m.end()) {
      missing.push_back(what + " '" + key + "'");
      return std::nullopt;
    }
    if (!Y.stocks().contains(it->second))
      throw Error(ErrorKind::UnknownStock, what + " '" + key + "' is attached to '" + it->second +
                                               "', which is not a stock of the substitute");
    used.insert(key);
    return it->second;
  };

  PrimitiveDiagram prim;
  for (const auto& s : Y.stocks()) prim.add_stock(s);
  std::unordered_map<Id, FlowExpr> fns;
  for (const auto& cf : c.flows) {
    prim.add_flow(cf.id);
    fns.emplace(cf.id, c.diagram->flow_fn(cf.id));
  }
  for (const auto& cf : c.flows) {
    if (cf.side == FlowSide::In) {
      if (auto s = lookup(a.down, used_down, cf.ambient_flow, "inflow"))
        prim.add_inflow(*cf.incidence, cf.id, *s);
    } else if (cf.side == FlowSide::Out) {
      if (auto s = lookup(a.up, used_up, cf.ambient_flow, "outflow"))
        prim.add_outflow(*cf.incidence, cf.id, *s);
    }
  }
  for (const auto& l : cp.links()) prim.add_link(l, cp.apply(SchemaArrow::Fl, l));
  for (const auto& ct : cp.ctlinks()) {
    const Id& local = cp.apply(SchemaArrow::Ct, ct);
    const Id& flow = cp.apply(SchemaArrow::Fl, local);
    const CorollaFlow& cf = c.flow(flow);
    Id ambient = local;
    for (const auto& [lo, am] : cf.links)
      if (lo == local) ambient = am;
    if (auto s = lookup(a.st, used_st, ambient, "link")) prim.add_ctlink(ct, local, *s);
  }

  if (!missing.empty()) {
    std::ostringstream os;
    os << "attachment for '" << c.stock << "' leaves unassigned:";
    for (const auto& m : missing) os << ' ' << m;
    throw Error(ErrorKind::IncompleteAttachment, os.str());
  }
  auto check_unused = [&](const std::map<Id, Id>& m, const std::set<Id>& used,
                          const std::string& what) {
    for (const auto& [k, v] : m)
      if (used.count(k) == 0)
        throw Error(ErrorKind::InvalidConfig, what + " attachment '" + k +
                                                  "' matches nothing in the corolla of '" +
                                                  c.stock + "'");
  };
  check_unused(a.up, used_up, "up");
  check_unused(a.down, used_down, "down");
  check_unused(a.st, used_st, "st");
  return make_diagram(std::move(prim), std::move(fns));
}

SubstitutedCorolla substitute_corolla(const Corolla& c, const DiagramPtr& Y,
                                      const AttachmentSpec& a, const SubstitutionOptions& opts) {
  return substitute_impl(c, Y, a, opts, [](const Corolla& co, const CorollaFlow& cf) {
    return unit_from_copy(co, cf).diagram;
  });
}

StockFlowDiagram hierarchical_expand(const StockFlowDiagram& X, const SubstitutionPlan& plan,
                                     const SubstitutionOptions& opts) {
  std::map<Id, const Substitution*> planned;
  for (const auto& sub : plan.substitutions) {
    if (!X.stocks().contains(sub.stock))
      throw Error(ErrorKind::UnknownStock, "plan substitutes unknown stock '" + sub.stock + "'");
    if (!planned.emplace(sub.stock, &sub).second)
      throw Error(ErrorKind::InvalidConfig, "stock '" + sub.stock + "' is substituted twice");
  }

  std::vector<UnitFlow> units;
  for (const auto& f : X.flows()) units.push_back(unit_flow(X, f));
  ElDiagram el;
  std::unordered_map<Id, std::size_t> unit_index;
  for (const auto& u : units) unit_index.emplace(u.flow, el.add_object("U:" + u.flow, u.diagram));
  auto unit_for = [&](const Corolla&, const CorollaFlow& cf) {
    return units[unit_index.at(cf.ambient_flow)].diagram;
  };

  for (const auto& s : X.stocks()) {
    Corolla c = corolla(X, s);
    auto it = planned.find(s);
    if (it == planned.end()) {
      std::size_t k = el.add_object("C:" + s, c.diagram);
      for (const auto& cf : c.flows)
        el.add_arrow(unit_index.at(cf.ambient_flow), k,
                     copy_inclusion(unit_for(c, cf), cf, c.diagram));
      continue;
    }
    const Substitution& sub = *it->second;
    SubstitutedCorolla sc;
    try {
      sc = substitute_impl(c, sub.with, sub.attach, opts, unit_for);
    } catch (const Error& e) {
      throw e.with_context("substituting '" + s + "'");
    }
    std::size_t k = el.add_object("E:" + s, sc.expanded);
    for (const auto& cf : c.flows)
      el.add_arrow(unit_index.at(cf.ambient_flow), k, sc.g_maps.at(cf.id));
  }
  return *colimit_el(el, opts.eq).apex;
}

StockFlowDiagram pipeline(const StockFlowDiagram& X, const std::vector<SplitSpec>& splits,
                          const SubstitutionPlan& plan, const SubstitutionOptions& opts) {
  StockFlowDiagram current = X;
  for (std::size_t k = 0; k < splits.size(); ++k) {
    try {
      current = split_flow(current, splits[k], opts.eq);
    } catch (const Error& e) {
      throw e.at_step(k + 1);
    }
  }
  try {
    return hierarchical_expand(current, plan, opts);
  } catch (const Error& e) {
    throw e.at_step(splits.size() + 1);
  }
}

}  // namespace sfd
