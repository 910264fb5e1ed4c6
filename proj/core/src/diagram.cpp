#include "stockflow/diagram.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "stockflow/error.hpp"

namespace sfd {

const FlowExpr& StockFlowDiagram::flow_fn(const Id& flow) const {
  auto it = fns_.find(flow);
  if (it == fns_.end()) throw Error(ErrorKind::UnknownFlow, "no flow '" + flow + "'");
  return it->second;
}

StockFlowDiagram make_diagram(PrimitiveDiagram prim, std::unordered_map<Id, FlowExpr> fns) {
  ValidationReport report = validate_primitive(prim);
  if (!report.ok())
    throw Error(ErrorKind::InvalidDiagram, "not a primitive stock & flow diagram:\n" +
                                               report.summary());
  for (const auto& f : prim.flows()) {
    auto it = fns.find(f);
    if (it == fns.end())
      throw Error(ErrorKind::MissingFlowFn, "flow '" + f + "' has no flow function");
    if (uses_time(it->second))
      throw Error(ErrorKind::TimeInFlowFn,
                  "flow function of '" + f + "' uses the time variable");
    std::vector<Id> own = prim.links_of(f);
    for (const auto& l : free_links(it->second)) {
      if (std::find(own.begin(), own.end(), l) == own.end())
        throw Error(ErrorKind::ForeignLink,
                    "flow function of '" + f + "' references link '" + l +
                        "' which does not point to it");
    }
  }
  for (const auto& [f, e] : fns) {
    if (!prim.flows().contains(f))
      throw Error(ErrorKind::MissingFlowFn, "flow function given for unknown flow '" + f + "'");
  }
  StockFlowDiagram d;
  d.prim_ = std::move(prim);
  d.fns_ = std::move(fns);
  return d;
}

DiagramMorphism::DiagramMorphism(DiagramPtr source, DiagramPtr target)
    : source_(std::move(source)), target_(std::move(target)) {}

ValidationReport DiagramMorphism::certify(const EqCheckConfig& cfg) {
  certified_.reset();
  ValidationReport report = check_naturality(*this);
  if (report.ok()) report.merge(check_flow_condition(*this, cfg));
  if (report.ok()) certified_ = cfg;
  return report;
}

void DiagramMorphism::induce_incidences() {
  const PrimitiveDiagram& src = source_->prim();
  const PrimitiveDiagram& tgt = target_->prim();
  auto induce = [&](SchemaObject incidence_obj, SchemaArrow to_flow, SchemaObject via,
                    auto&& find_target) {
    FinMap& comp = component(incidence_obj);
    for (const auto& x : src.carrier(incidence_obj)) {
      const Id& image = component(via).at(src.apply(to_flow, x));
      std::optional<Id> y = find_target(image);
      if (!y)
        throw Error(ErrorKind::NotNatural, "no " + std::string(to_string(incidence_obj)) +
                                               " over '" + image + "' for '" + x + "'");
      comp.set(x, *y);
    }
  };
  induce(SchemaObject::Inflow, SchemaArrow::In, SchemaObject::Flow,
         [&](const Id& g) { return tgt.inflow_of(g); });
  induce(SchemaObject::Outflow, SchemaArrow::Out, SchemaObject::Flow,
         [&](const Id& g) { return tgt.outflow_of(g); });
  induce(SchemaObject::CTLink, SchemaArrow::Ct, SchemaObject::Link,
         [&](const Id& l) { return tgt.ctlink_of(l); });
}

ValidationReport check_naturality(const DiagramMorphism& F) {
  const PrimitiveDiagram& src = F.source()->prim();
  const PrimitiveDiagram& tgt = F.target()->prim();
  ValidationReport report;
  for (SchemaObject o : kSchemaObjects) {
    std::string name(to_string(o));
    for (const auto& x : src.carrier(o)) {
      const Id* y = F.component(o).find(x);
      if (y == nullptr)
        report.add("component:" + name, x, name + " component undefined on '" + x + "'");
      else if (!tgt.carrier(o).contains(*y))
        report.add("component:" + name, x,
                   name + " component sends '" + x + "' outside the target: '" + *y + "'");
    }
  }
  for (SchemaArrow a : kSchemaArrows) {
    std::string name(to_string(a));
    for (const auto& x : src.carrier(domain(a))) {
      ++report.checked;
      const Id* fx = F.component(domain(a)).find(x);
      const Id* ax = src.map(a).find(x);
      if (fx == nullptr || ax == nullptr) continue;
      const Id* lhs = F.component(codomain(a)).find(*ax);
      const Id* rhs = tgt.map(a).find(*fx);
      if (lhs == nullptr || rhs == nullptr) continue;
      if (*lhs != *rhs)
        report.add("naturality:" + name, x,
                   "square for " + name + " fails at '" + x + "': F(" + name + "(x)) = '" + *lhs +
                       "' but " + name + "(F(x)) = '" + *rhs + "'");
    }
  }
  return report;
}

ValidationReport check_flow_condition(const DiagramMorphism& F, const EqCheckConfig& cfg) {
  const StockFlowDiagram& src = *F.source();
  const StockFlowDiagram& tgt = *F.target();
  std::unordered_map<Id, std::vector<Id>> preimage;
  for (const auto& f : src.flows()) {
    const Id* g = F.component(SchemaObject::Flow).find(f);
    if (g != nullptr) preimage[*g].push_back(f);
  }
  ValidationReport report;
  for (const auto& g : tgt.flows()) {
    auto it = preimage.find(g);
    if (it == preimage.end()) continue;
    ++report.checked;
    std::vector<FlowExpr> terms;
    bool complete = true;
    for (const auto& f : it->second) {
      std::unordered_map<Id, Id> rename;
      for (const auto& l : src.prim().links_of(f)) {
        const Id* image = F.component(SchemaObject::Link).find(l);
        if (image == nullptr) {
          complete = false;
          break;
        }
        rename.emplace(l, *image);
      }
      if (!complete) break;
      terms.push_back(precompose(src.flow_fn(f), rename));
    }
    if (!complete) {
      report.add("flow-condition", g, "link component undefined over flow '" + g + "'");
      continue;
    }
    FlowExpr expected = sum_exprs(terms);
    SampleComparison cmp = compare_sampled(tgt.flow_fn(g), expected, cfg);
    if (!cmp.equal)
      report.add("flow-condition", g,
                 "flow function of '" + g + "' differs from the summed preimage (max deviation " +
                     std::to_string(cmp.max_abs_deviation) + ")");
  }
  return report;
}

DiagramMorphism compose(const DiagramMorphism& F, const DiagramMorphism& G) {
  if (F.target() != G.source() && !(*F.target() == *G.source()))
    throw Error(ErrorKind::NotNatural, "morphisms are not composable");
  DiagramMorphism H(F.source(), G.target());
  for (SchemaObject o : kSchemaObjects) {
    for (const auto& [x, y] : F.component(o).table()) {
      const Id* z = G.component(o).find(y);
      if (z != nullptr) H.component(o).set(x, *z);
    }
  }
  return H;
}

DiagramMorphism identity(const DiagramPtr& X) {
  DiagramMorphism F(X, X);
  for (SchemaObject o : kSchemaObjects)
    for (const auto& x : X->prim().carrier(o)) F.component(o).set(x, x);
  return F;
}

StockFlowDiagram disc(const std::vector<Id>& stocks) {
  PrimitiveDiagram p;
  for (const auto& s : stocks) p.add_stock(s);
  return make_diagram(std::move(p), {});
}

DiagramMorphism canonical_disc_map(const DiagramPtr& X) {
  DiagramMorphism F(share(disc(X->stocks().ids())), X);
  for (const auto& s : X->stocks()) F.component(SchemaObject::Stock).set(s, s);
  return F;
}

DiagramMorphism invert(const DiagramMorphism& F) {
  DiagramMorphism G(F.target(), F.source());
  for (SchemaObject o : kSchemaObjects)
    for (const auto& [x, y] : F.component(o).table()) G.component(o).set(y, x);
  return G;
}

// ---------------------------------------------------------------------------
// Isomorphism search

namespace {

using OptId = std::optional<Id>;

struct FlowShape {
  OptId up;
  OptId down;
  std::vector<Id> links;
  std::vector<OptId> link_sources;
};

struct Profile {
  std::vector<FlowShape> flows;  // in carrier order
  std::unordered_map<Id, std::array<std::size_t, 3>> stock_degree;  // in, out, link sources
  std::map<std::pair<OptId, OptId>, std::size_t> endpoint_count;

  explicit Profile(const PrimitiveDiagram& p) {
    for (const auto& s : p.stocks()) stock_degree[s] = {0, 0, 0};
    for (const auto& i : p.inflows()) stock_degree[p.apply(SchemaArrow::Down, i)][0]++;
    for (const auto& o : p.outflows()) stock_degree[p.apply(SchemaArrow::Up, o)][1]++;
    for (const auto& c : p.ctlinks()) stock_degree[p.apply(SchemaArrow::St, c)][2]++;
    for (const auto& f : p.flows()) {
      FlowShape shape{p.upstream_stock(f), p.downstream_stock(f), p.links_of(f), {}};
      for (const auto& l : shape.links) shape.link_sources.push_back(p.link_source(l));
      endpoint_count[{shape.up, shape.down}]++;
      flows.push_back(std::move(shape));
    }
  }

  std::size_t count(const OptId& up, const OptId& down) const {
    auto it = endpoint_count.find({up, down});
    return it == endpoint_count.end() ? 0 : it->second;
  }
};

class IsoSearch {
 public:
  IsoSearch(const DiagramPtr& X, const DiagramPtr& Y, const EqCheckConfig& eq)
      : X_(X), Y_(Y), eq_(eq), px_(X->prim()), py_(Y->prim()) {}

  std::optional<DiagramMorphism> run() {
    if (px_.count(std::nullopt, std::nullopt) != py_.count(std::nullopt, std::nullopt))
      return std::nullopt;
    if (assign_stock(0)) return result_;
    return std::nullopt;
  }

 private:
  OptId mapped(const OptId& s) const {
    if (!s) return std::nullopt;
    return stock_map_.at(*s);
  }

  bool assign_stock(std::size_t k) {
    const auto& xs = X_->stocks().ids();
    if (k == xs.size()) return match_flows();
    const Id& s = xs[k];
    for (const auto& t : Y_->stocks()) {
      if (used_stocks_.count(t) != 0) continue;
      if (px_.stock_degree.at(s) != py_.stock_degree.at(t)) continue;
      stock_map_[s] = t;
      used_stocks_.insert(t);
      if (consistent(s, k) && assign_stock(k + 1)) return true;
      used_stocks_.erase(t);
      stock_map_.erase(s);
    }
    return false;
  }

  // Flow multiplicities between the new stock and every stock already placed.
  bool consistent(const Id& s, std::size_t k) const {
    const Id& t = stock_map_.at(s);
    if (px_.count(s, std::nullopt) != py_.count(t, std::nullopt)) return false;
    if (px_.count(std::nullopt, s) != py_.count(std::nullopt, t)) return false;
    const auto& xs = X_->stocks().ids();
    for (std::size_t j = 0; j <= k; ++j) {
      const Id& s2 = xs[j];
      const Id& t2 = stock_map_.at(s2);
      if (px_.count(s, s2) != py_.count(t, t2)) return false;
      if (px_.count(s2, s) != py_.count(t2, t)) return false;
    }
    return true;
  }

  bool match_flows() {
    viable_.clear();
    flow_map_.clear();
    used_flows_.clear();
    link_maps_.clear();
    return assign_flow(0);
  }

  bool assign_flow(std::size_t k) {
    if (k == px_.flows.size()) return finish();
    const FlowShape& fx = px_.flows[k];
    const Id& f = X_->flows().ids()[k];
    for (std::size_t j = 0; j < py_.flows.size(); ++j) {
      const Id& g = Y_->flows().ids()[j];
      if (used_flows_.count(g) != 0) continue;
      const FlowShape& gy = py_.flows[j];
      if (mapped(fx.up) != gy.up || mapped(fx.down) != gy.down) continue;
      if (fx.links.size() != gy.links.size()) continue;
      const auto* link_map = viable(k, j);
      if (link_map == nullptr) continue;
      flow_map_[f] = g;
      used_flows_.insert(g);
      link_maps_[f] = *link_map;
      if (assign_flow(k + 1)) return true;
      used_flows_.erase(g);
      flow_map_.erase(f);
      link_maps_.erase(f);
    }
    return false;
  }

  // A link bijection for (f, g) respecting link sources and making the flow
  // functions agree, memoized per stock assignment.
  const std::unordered_map<Id, Id>* viable(std::size_t fi, std::size_t gi) {
    auto key = std::make_pair(fi, gi);
    auto it = viable_.find(key);
    if (it == viable_.end()) {
      std::unordered_map<Id, Id> links;
      std::vector<bool> used(py_.flows[gi].links.size(), false);
      std::optional<std::unordered_map<Id, Id>> found;
      if (assign_link(fi, gi, 0, links, used)) found = links;
      it = viable_.emplace(key, std::move(found)).first;
    }
    return it->second ? &*it->second : nullptr;
  }

  bool assign_link(std::size_t fi, std::size_t gi, std::size_t k,
                   std::unordered_map<Id, Id>& links, std::vector<bool>& used) {
    const FlowShape& fx = px_.flows[fi];
    const FlowShape& gy = py_.flows[gi];
    if (k == fx.links.size()) {
      const Id& f = X_->flows().ids()[fi];
      const Id& g = Y_->flows().ids()[gi];
      FlowExpr moved = precompose(X_->flow_fn(f), links);
      return compare_sampled(moved, Y_->flow_fn(g), eq_).equal;
    }
    for (std::size_t j = 0; j < gy.links.size(); ++j) {
      if (used[j]) continue;
      if (mapped(fx.link_sources[k]) != gy.link_sources[j]) continue;
      used[j] = true;
      links[fx.links[k]] = gy.links[j];
      if (assign_link(fi, gi, k + 1, links, used)) return true;
      links.erase(fx.links[k]);
      used[j] = false;
    }
    return false;
  }

  bool finish() {
    DiagramMorphism F(X_, Y_);
    for (const auto& [s, t] : stock_map_) F.component(SchemaObject::Stock).set(s, t);
    for (const auto& [f, g] : flow_map_) F.component(SchemaObject::Flow).set(f, g);
    for (const auto& [f, links] : link_maps_)
      for (const auto& [l, m] : links) F.component(SchemaObject::Link).set(l, m);
    try {
      F.induce_incidences();
    } catch (const Error&) {
      return false;
    }
    if (!check_naturality(F).ok()) return false;
    result_ = std::move(F);
    return true;
  }

  DiagramPtr X_;
  DiagramPtr Y_;
  EqCheckConfig eq_;
  Profile px_;
  Profile py_;
  std::unordered_map<Id, Id> stock_map_;
  std::unordered_set<Id> used_stocks_;
  std::unordered_map<Id, Id> flow_map_;
  std::unordered_set<Id> used_flows_;
  std::unordered_map<Id, std::unordered_map<Id, Id>> link_maps_;
  std::map<std::pair<std::size_t, std::size_t>, std::optional<std::unordered_map<Id, Id>>> viable_;
  std::optional<DiagramMorphism> result_;
};

bool is_bijective_iso(const DiagramMorphism& F, const EqCheckConfig& eq) {
  for (SchemaObject o : kSchemaObjects) {
    std::unordered_set<Id> images;
    for (const auto& x : F.source()->prim().carrier(o)) {
      const Id* y = F.component(o).find(x);
      if (y == nullptr || !images.insert(*y).second) return false;
    }
    if (images.size() != F.target()->prim().carrier(o).size()) return false;
  }
  if (!check_naturality(F).ok()) return false;
  if (!check_flow_condition(F, eq).ok()) return false;
  return true;
}

}  // namespace

std::optional<DiagramMorphism> iso_check(const DiagramPtr& X, const DiagramPtr& Y,
                                         const IsoSearchConfig& cfg) {
  for (SchemaObject o : kSchemaObjects) {
    std::size_t nx = X->prim().carrier(o).size();
    std::size_t ny = Y->prim().carrier(o).size();
    if (nx > cfg.max_carrier || ny > cfg.max_carrier)
      throw Error(ErrorKind::TooLarge, std::string(to_string(o)) + " carrier exceeds the search bound of " +
                                           std::to_string(cfg.max_carrier));
  }
  for (SchemaObject o : kSchemaObjects)
    if (X->prim().carrier(o).size() != Y->prim().carrier(o).size()) return std::nullopt;

  // Name-preserving candidate first; it is the common case after a round trip.
  bool same_names = true;
  for (SchemaObject o : kSchemaObjects)
    for (const auto& x : X->prim().carrier(o))
      if (!Y->prim().carrier(o).contains(x)) same_names = false;
  if (same_names) {
    DiagramMorphism F(X, Y);
    for (SchemaObject o : kSchemaObjects)
      for (const auto& x : X->prim().carrier(o)) F.component(o).set(x, x);
    if (is_bijective_iso(F, cfg.eq)) return F;
  }

  std::optional<DiagramMorphism> found = IsoSearch(X, Y, cfg.eq).run();
  if (found && is_bijective_iso(*found, cfg.eq)) return found;
  return std::nullopt;
}

}  // namespace sfd
