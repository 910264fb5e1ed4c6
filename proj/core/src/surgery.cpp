#include "stockflow/surgery.hpp"

#include <algorithm>
#include <unordered_set>

#include "stockflow/error.hpp"

namespace sfd {

namespace {

// X taken apart into unit flows and, per stock, the single-flow parts of its corolla.
struct Pieces {
  std::vector<UnitFlow> units;
  std::vector<Id> stocks;
  std::vector<std::vector<SingleFlowPart>> parts;

  explicit Pieces(const StockFlowDiagram& X) {
    for (const auto& f : X.flows()) units.push_back(unit_flow(X, f));
    for (const auto& s : X.stocks()) {
      stocks.push_back(s);
      parts.push_back(single_flow_parts(corolla(X, s)).parts);
    }
  }

  StockFlowDiagram rebuild(const EqCheckConfig& cfg) const {
    std::vector<Corolla> corollas;
    for (std::size_t k = 0; k < stocks.size(); ++k)
      corollas.push_back(glue_parts(stocks[k], parts[k], cfg));
    return recompose(assemble_el(units, corollas), cfg);
  }
};

UnitFlow make_unit(const Id& f, const std::vector<Id>& links, const FlowExpr& fn) {
  PrimitiveDiagram prim;
  prim.add_flow(f);
  for (const auto& l : links) prim.add_link(l, f);
  return UnitFlow{share(make_diagram(std::move(prim), {{f, fn}})), f};
}

void require_links_within(const FlowExpr& fn, const std::vector<Id>& allowed, const Id& owner) {
  for (const auto& l : free_links(fn))
    if (std::find(allowed.begin(), allowed.end(), l) == allowed.end())
      throw Error(ErrorKind::ForeignLink,
                  "function for '" + owner + "' references link '" + l + "' it does not own");
}

// Validates the split against the ambient function of the flow, given over its links.
void check_split(const SplitSpec& spec, const FlowExpr& original, const std::vector<Id>& links,
                 const EqCheckConfig& cfg) {
  if (spec.parts.empty())
    throw Error(ErrorKind::InvalidConfig, "split of '" + spec.flow + "' has no parts");
  std::unordered_set<Id> ids;
  std::vector<FlowExpr> fns;
  for (const auto& p : spec.parts) {
    if (!ids.insert(p.id).second)
      throw Error(ErrorKind::DuplicateFlowId, "part id '" + p.id + "' is used twice");
    require_links_within(p.fn, links, p.id);
    fns.push_back(p.fn);
  }
  SampleComparison cmp = compare_sampled(sum_exprs(fns), original, cfg);
  if (!cmp.equal)
    throw SumMismatchError(cmp.max_abs_deviation,
                           "parts of '" + spec.flow + "' do not sum to its flow function (max deviation " +
                               std::to_string(cmp.max_abs_deviation) + ")");
}

struct CollapseEntry {
  SchemaObject object;
  Id from;
  Id to;
};

// Replaces every part copying spec.flow with one part per split part.
std::vector<SingleFlowPart> split_parts(const std::vector<SingleFlowPart>& parts,
                                        const SplitSpec& spec,
                                        std::vector<CollapseEntry>* collapse) {
  std::vector<SingleFlowPart> out;
  for (const auto& part : parts) {
    if (part.ambient_flow != spec.flow) {
      out.push_back(part);
      continue;
    }
    for (const auto& sp : spec.parts) {
      const Id suffix = "@" + sp.id;
      std::optional<Id> inc;
      Id copy = sp.id + "#ref";
      if (part.incidence) {
        inc = *part.incidence + suffix;
        copy = *inc + "#" + std::string(to_string(part.side));
      }
      std::vector<PartLink> links;
      std::unordered_map<Id, Id> rename;
      for (const auto& pl : part.links) {
        PartLink nl{pl.local + suffix, pl.ambient + suffix, std::nullopt};
        if (pl.ctlink) nl.ctlink = *pl.ctlink + suffix;
        rename.emplace(pl.ambient, nl.local);
        if (collapse) {
          collapse->push_back({SchemaObject::Link, nl.local, pl.local});
          if (pl.ctlink) collapse->push_back({SchemaObject::CTLink, *nl.ctlink, *pl.ctlink});
        }
        links.push_back(std::move(nl));
      }
      if (collapse) {
        collapse->push_back({SchemaObject::Flow, copy, part.flow});
        if (inc) {
          SchemaObject o = part.side == FlowSide::In ? SchemaObject::Inflow : SchemaObject::Outflow;
          collapse->push_back({o, *inc, *part.incidence});
        }
      }
      out.push_back(make_part(part.stock, copy, sp.id, part.side, inc, std::move(links),
                              precompose(sp.fn, rename)));
    }
  }
  return out;
}

}  // namespace

CorollaSplit split_flow_in_corolla(const Corolla& c, const SplitSpec& spec,
                                   const EqCheckConfig& cfg) {
  const CorollaFlow* copy = nullptr;
  for (const auto& cf : c.flows) {
    if (cf.ambient_flow == spec.flow && copy == nullptr) copy = &cf;
  }
  if (copy == nullptr)
    throw Error(ErrorKind::UnknownFlow,
                "corolla of '" + c.stock + "' has no copy of flow '" + spec.flow + "'");
  for (const auto& p : spec.parts)
    for (const auto& cf : c.flows)
      if (cf.ambient_flow != spec.flow && (cf.ambient_flow == p.id || cf.id == p.id))
        throw Error(ErrorKind::DuplicateFlowId, "part id '" + p.id + "' is already a flow");

  std::vector<Id> ambient_links;
  std::unordered_map<Id, Id> to_ambient;
  for (const auto& [local, ambient] : copy->links) {
    ambient_links.push_back(ambient);
    to_ambient.emplace(local, ambient);
  }
  check_split(spec, precompose(c.diagram->flow_fn(copy->id), to_ambient), ambient_links, cfg);

  std::vector<CollapseEntry> entries;
  auto parts = split_parts(single_flow_parts(c).parts, spec, &entries);
  Corolla result = glue_parts(c.stock, parts, cfg);

  DiagramMorphism collapse(result.diagram, c.diagram);
  for (SchemaObject o : kSchemaObjects)
    for (const auto& x : result.diagram->prim().carrier(o))
      if (c.diagram->prim().carrier(o).contains(x)) collapse.component(o).set(x, x);
  for (const auto& e : entries) collapse.component(e.object).set(e.from, e.to);
  collapse.certify(cfg);
  return CorollaSplit{std::move(result), std::move(collapse)};
}

StockFlowDiagram split_flow(const StockFlowDiagram& X, const SplitSpec& spec,
                            const EqCheckConfig& cfg) {
  if (!X.flows().contains(spec.flow))
    throw Error(ErrorKind::UnknownFlow, "no flow '" + spec.flow + "'");
  for (const auto& p : spec.parts)
    if (p.id != spec.flow && X.flows().contains(p.id))
      throw Error(ErrorKind::DuplicateFlowId, "part id '" + p.id + "' is already a flow");
  std::vector<Id> links = X.prim().links_of(spec.flow);
  check_split(spec, X.flow_fn(spec.flow), links, cfg);

  Pieces pieces(X);
  std::vector<UnitFlow> units;
  for (auto& u : pieces.units) {
    if (u.flow != spec.flow) {
      units.push_back(std::move(u));
      continue;
    }
    for (const auto& sp : spec.parts) {
      std::vector<Id> renamed;
      std::unordered_map<Id, Id> rename;
      for (const auto& l : links) {
        renamed.push_back(l + "@" + sp.id);
        rename.emplace(l, renamed.back());
      }
      units.push_back(make_unit(sp.id, renamed, precompose(sp.fn, rename)));
    }
  }
  pieces.units = std::move(units);
  for (auto& ps : pieces.parts) ps = split_parts(ps, spec, nullptr);
  return pieces.rebuild(cfg);
}

StockFlowDiagram update_flow(const StockFlowDiagram& X, const FlowUpdate& u,
                             const EqCheckConfig& cfg) {
  const PrimitiveDiagram& p = X.prim();
  if (!X.stocks().contains(u.stock)) throw Error(ErrorKind::UnknownStock, "no stock '" + u.stock + "'");
  if (!X.flows().contains(u.flow)) throw Error(ErrorKind::UnknownFlow, "no flow '" + u.flow + "'");
  if (p.upstream_stock(u.flow) != u.stock && p.downstream_stock(u.flow) != u.stock)
    throw Error(ErrorKind::UnknownFlow,
                "flow '" + u.flow + "' is not incident to stock '" + u.stock + "'");
  std::vector<Id> own = p.links_of(u.flow);
  for (const auto& l : u.links)
    if (std::find(own.begin(), own.end(), l) == own.end())
      throw Error(ErrorKind::ForeignLink, "link '" + l + "' does not point to '" + u.flow + "'");
  require_links_within(u.fn, u.links, u.flow);

  std::vector<Id> kept;
  for (const auto& l : own)
    if (std::find(u.links.begin(), u.links.end(), l) != u.links.end()) kept.push_back(l);

  Pieces pieces(X);
  for (auto& unit : pieces.units)
    if (unit.flow == u.flow) unit = make_unit(u.flow, kept, u.fn);
  for (auto& ps : pieces.parts) {
    std::vector<SingleFlowPart> out;
    for (auto& part : ps) {
      if (part.ambient_flow != u.flow) {
        out.push_back(std::move(part));
        continue;
      }
      std::vector<PartLink> links;
      std::unordered_map<Id, Id> rename;
      bool has_ctlink = false;
      for (const auto& pl : part.links) {
        if (std::find(kept.begin(), kept.end(), pl.ambient) == kept.end()) continue;
        rename.emplace(pl.ambient, pl.local);
        has_ctlink = has_ctlink || pl.ctlink.has_value();
        links.push_back(pl);
      }
      if (part.side == FlowSide::Reference && !has_ctlink) continue;
      out.push_back(make_part(part.stock, part.flow, part.ambient_flow, part.side, part.incidence,
                              std::move(links), precompose(u.fn, rename)));
    }
    ps = std::move(out);
  }
  return pieces.rebuild(cfg);
}

StockFlowDiagram add_flow(const StockFlowDiagram& X, const Id& s, FlowSide side,
                          const Id& new_flow, const std::vector<NewLink>& links, const FlowExpr& fn,
                          const EqCheckConfig& cfg) {
  const PrimitiveDiagram& p = X.prim();
  if (side == FlowSide::Reference)
    throw Error(ErrorKind::InvalidConfig, "a new flow must be an inflow or an outflow");
  if (X.flows().contains(new_flow))
    throw Error(ErrorKind::DuplicateFlowId, "flow '" + new_flow + "' already exists");
  if (!X.stocks().contains(s)) throw Error(ErrorKind::UnknownStock, "no stock '" + s + "'");
  const Carrier& incidences = side == FlowSide::In ? p.inflows() : p.outflows();
  if (incidences.contains(new_flow))
    throw Error(ErrorKind::DuplicateId, "incidence id '" + new_flow + "' already exists");
  std::vector<Id> ids;
  std::unordered_set<Id> seen;
  for (const auto& nl : links) {
    if (X.links().contains(nl.id) || !seen.insert(nl.id).second)
      throw Error(ErrorKind::DuplicateId, "link id '" + nl.id + "' already exists");
    if (p.ctlinks().contains(nl.id) && nl.source)
      throw Error(ErrorKind::DuplicateId, "CTLink id '" + nl.id + "' already exists");
    if (nl.source && !X.stocks().contains(*nl.source))
      throw Error(ErrorKind::UnknownStock, "link '" + nl.id + "' reads unknown stock '" +
                                               *nl.source + "'");
    ids.push_back(nl.id);
  }
  require_links_within(fn, ids, new_flow);

  Pieces pieces(X);
  pieces.units.push_back(make_unit(new_flow, ids, fn));
  for (std::size_t k = 0; k < pieces.stocks.size(); ++k) {
    const Id& t = pieces.stocks[k];
    std::vector<PartLink> part_links;
    bool sourced_here = false;
    for (const auto& nl : links) {
      PartLink pl{nl.id, nl.id, std::nullopt};
      if (nl.source == t) {
        pl.ctlink = nl.id;
        sourced_here = true;
      }
      part_links.push_back(std::move(pl));
    }
    if (t == s) {
      Id copy = new_flow + "#" + std::string(to_string(side));
      pieces.parts[k].push_back(
          make_part(t, copy, new_flow, side, new_flow, std::move(part_links), fn));
    } else if (sourced_here) {
      pieces.parts[k].push_back(make_part(t, new_flow + "#ref", new_flow, FlowSide::Reference,
                                          std::nullopt, std::move(part_links), fn));
    }
  }
  return pieces.rebuild(cfg);
}

}  // namespace sfd
