#include "stockflow/colimit.hpp"

#include <numeric>
#include <unordered_set>

#include "stockflow/error.hpp"

namespace sfd {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Quotient {
  std::vector<Id> names;              // class names in order of first member
  std::vector<std::size_t> class_of;  // per element
};

// Classes ordered by first member; each named after that member, with `~k`
// appended when an earlier class already holds the name.
Quotient quotient(const std::vector<Id>& ids, UnionFind& uf) {
  Quotient q;
  q.class_of.resize(ids.size());
  std::unordered_map<std::size_t, std::size_t> root_to_class;
  std::vector<Id> base;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, fresh] = root_to_class.emplace(uf.find(i), base.size());
    if (fresh) base.push_back(ids[i]);
    q.class_of[i] = it->second;
  }
  std::unordered_set<Id> reserved(base.begin(), base.end());
  std::unordered_set<Id> taken;
  for (const auto& b : base) {
    Id name = b;
    if (taken.count(name) != 0) {
      for (std::size_t k = 2;; ++k) {
        name = b + "~" + std::to_string(k);
        if (reserved.count(name) == 0 && taken.count(name) == 0) break;
      }
    }
    taken.insert(name);
    q.names.push_back(std::move(name));
  }
  return q;
}

// One carrier of a quotient of a family of diagrams: every element is
// (diagram index, id) and belongs to a class.
struct CarrierQuotient {
  std::vector<std::pair<std::size_t, Id>> elements;
  std::vector<std::size_t> class_of;
  std::vector<Id> names;
  std::vector<std::unordered_map<Id, std::size_t>> lookup;  // per diagram: id -> class

  std::size_t class_of_element(std::size_t diagram, const Id& id) const {
    return lookup[diagram].at(id);
  }
};

enum class FlowRule { ZSide, FirstSingleton };

struct Assembled {
  DiagramPtr apex;
  std::vector<DiagramMorphism> legs;
};

FlowExpr transported_sum(const StockFlowDiagram& d, const std::vector<Id>& flows,
                         const FinMap& link_map) {
  std::vector<FlowExpr> terms;
  terms.reserve(flows.size());
  for (const auto& f : flows) {
    std::unordered_map<Id, Id> rename;
    for (const auto& l : d.prim().links_of(f)) rename.emplace(l, link_map.at(l));
    terms.push_back(precompose(d.flow_fn(f), rename));
  }
  return sum_exprs(terms);
}

// Builds the quotient diagram and the legs out of each member diagram.
Assembled assemble(const std::vector<DiagramPtr>& diagrams,
                   const std::array<CarrierQuotient, 6>& cq, FlowRule rule,
                   const EqCheckConfig& cfg) {
  PrimitiveDiagram prim;
  for (SchemaObject o : kSchemaObjects)
    for (const auto& n : cq[index(o)].names) prim.carrier(o).insert(n);

  for (SchemaArrow a : kSchemaArrows) {
    const CarrierQuotient& dom = cq[index(domain(a))];
    const CarrierQuotient& cod = cq[index(codomain(a))];
    std::vector<std::optional<std::size_t>> image(dom.names.size());
    for (std::size_t i = 0; i < dom.elements.size(); ++i) {
      const auto& [j, x] = dom.elements[i];
      std::size_t target = cod.class_of_element(j, diagrams[j]->prim().apply(a, x));
      auto& slot = image[dom.class_of[i]];
      if (slot && *slot != target)
        throw Error(ErrorKind::NotNatural,
                    std::string(to_string(a)) + " is not well defined on the class of '" +
                        dom.names[dom.class_of[i]] + "'");
      slot = target;
    }
    for (std::size_t c = 0; c < image.size(); ++c)
      prim.map(a).set(dom.names[c], cod.names[*image[c]]);
  }

  ValidationReport report = validate_primitive(prim);
  if (!report.ok())
    throw Error(ErrorKind::NotPrimitive,
                "gluing does not yield a primitive diagram:\n" + report.summary());

  std::vector<FinMap> link_legs(diagrams.size());
  const CarrierQuotient& links = cq[index(SchemaObject::Link)];
  for (std::size_t i = 0; i < links.elements.size(); ++i) {
    const auto& [j, x] = links.elements[i];
    link_legs[j].set(x, links.names[links.class_of[i]]);
  }

  const CarrierQuotient& flows = cq[index(SchemaObject::Flow)];
  std::vector<std::vector<std::vector<Id>>> members(
      flows.names.size(), std::vector<std::vector<Id>>(diagrams.size()));
  for (std::size_t i = 0; i < flows.elements.size(); ++i) {
    const auto& [j, x] = flows.elements[i];
    members[flows.class_of[i]][j].push_back(x);
  }

  std::unordered_map<Id, FlowExpr> fns;
  for (std::size_t c = 0; c < flows.names.size(); ++c) {
    const Id& name = flows.names[c];
    std::vector<std::size_t> meeting;
    for (std::size_t j = 0; j < diagrams.size(); ++j)
      if (!members[c][j].empty()) meeting.push_back(j);
    auto candidate = [&](std::size_t j) {
      return transported_sum(*diagrams[j], members[c][j], link_legs[j]);
    };

    std::size_t chosen = meeting.front();
    std::vector<std::size_t> compare_with;
    if (rule == FlowRule::ZSide) {
      compare_with.assign(meeting.begin() + 1, meeting.end());
    } else {
      std::vector<std::size_t> singletons;
      for (std::size_t j : meeting)
        if (members[c][j].size() == 1) singletons.push_back(j);
      if (!singletons.empty()) {
        chosen = singletons.front();
        compare_with.assign(singletons.begin() + 1, singletons.end());
      }
    }
    FlowExpr gamma = candidate(chosen);
    for (std::size_t j : compare_with) {
      SampleComparison cmp = compare_sampled(gamma, candidate(j), cfg);
      if (!cmp.equal)
        throw Error(ErrorKind::InconsistentFlowFns,
                    "flow functions glued into '" + name +
                        "' disagree (max deviation " + std::to_string(cmp.max_abs_deviation) + ")");
    }
    fns.emplace(name, std::move(gamma));
  }

  Assembled out{share(make_diagram(std::move(prim), std::move(fns))), {}};
  for (std::size_t j = 0; j < diagrams.size(); ++j) out.legs.emplace_back(diagrams[j], out.apex);
  for (SchemaObject o : kSchemaObjects) {
    const CarrierQuotient& q = cq[index(o)];
    for (std::size_t i = 0; i < q.elements.size(); ++i) {
      const auto& [j, x] = q.elements[i];
      out.legs[j].component(o).set(x, q.names[q.class_of[i]]);
    }
  }
  for (auto& leg : out.legs) leg.certify(cfg);
  return out;
}

void require_natural(const DiagramMorphism& F, const std::string& what) {
  ValidationReport r = check_naturality(F);
  if (!r.ok()) throw Error(ErrorKind::NotNatural, what + " is not natural:\n" + r.summary());
}

}  // namespace

FinSetPushout finset_pushout(const Carrier& A, const Carrier& B, const Carrier& C, const FinMap& f,
                             const FinMap& g) {
  FinSetPushout out;
  std::vector<Id> ids;
  for (const auto& b : B) {
    out.elements.emplace_back(0, b);
    ids.push_back(b);
  }
  for (const auto& c : C) {
    out.elements.emplace_back(1, c);
    ids.push_back(c);
  }
  UnionFind uf(ids.size());
  for (const auto& a : A) {
    const Id* fb = f.find(a);
    const Id* gc = g.find(a);
    if (fb == nullptr || gc == nullptr)
      throw Error(ErrorKind::NotNatural, "span leg undefined on '" + a + "'");
    auto pb = B.position(*fb);
    auto pc = C.position(*gc);
    if (!pb || !pc)
      throw Error(ErrorKind::NotNatural, "span leg sends '" + a + "' outside its codomain");
    uf.unite(*pb, B.size() + *pc);
  }
  Quotient q = quotient(ids, uf);
  for (const auto& n : q.names) out.apex.insert(n);
  out.class_of = q.class_of;
  for (std::size_t i = 0; i < out.elements.size(); ++i) {
    const auto& [side, x] = out.elements[i];
    (side == 0 ? out.inj_b : out.inj_c).set(x, q.names[q.class_of[i]]);
  }
  return out;
}

PushoutResult presheaf_pushout(const SpanOfDiagrams& span, const EqCheckConfig& cfg) {
  const DiagramMorphism& s1 = span.s1;
  const DiagramMorphism& s2 = span.s2;
  if (!(*s1.source() == *span.apex) || !(*s2.source() == *span.apex))
    throw Error(ErrorKind::NotNatural, "span legs do not start at the apex");
  require_natural(s1, "first span leg");
  require_natural(s2, "second span leg");

  std::vector<DiagramPtr> diagrams{s1.target(), s2.target()};
  std::array<CarrierQuotient, 6> cq;
  for (SchemaObject o : kSchemaObjects) {
    FinSetPushout fp = finset_pushout(span.apex->prim().carrier(o), diagrams[0]->prim().carrier(o),
                                      diagrams[1]->prim().carrier(o), s1.component(o),
                                      s2.component(o));
    CarrierQuotient& q = cq[index(o)];
    q.names = fp.apex.ids();
    q.class_of = fp.class_of;
    q.lookup.resize(2);
    for (std::size_t i = 0; i < fp.elements.size(); ++i) {
      const auto& [side, x] = fp.elements[i];
      q.elements.emplace_back(static_cast<std::size_t>(side), x);
      q.lookup[side].emplace(x, fp.class_of[i]);
    }
  }
  Assembled a = assemble(diagrams, cq, FlowRule::ZSide, cfg);
  return PushoutResult{a.apex, std::move(a.legs[0]), std::move(a.legs[1])};
}

std::size_t ElDiagram::add_object(std::string name, DiagramPtr diagram) {
  objects.push_back(ElObject{std::move(name), std::move(diagram)});
  return objects.size() - 1;
}

void ElDiagram::add_arrow(std::size_t source, std::size_t target, DiagramMorphism map) {
  arrows.push_back(ElArrow{source, target, std::move(map)});
}

std::size_t ElDiagram::find(const std::string& name) const {
  for (std::size_t i = 0; i < objects.size(); ++i)
    if (objects[i].name == name) return i;
  throw Error(ErrorKind::InvalidDiagram, "no object named '" + name + "'");
}

ColimitResult colimit_el(const ElDiagram& d, const EqCheckConfig& cfg) {
  std::vector<DiagramPtr> diagrams;
  for (const auto& obj : d.objects) diagrams.push_back(obj.diagram);
  for (std::size_t k = 0; k < d.arrows.size(); ++k) {
    const ElArrow& arr = d.arrows[k];
    if (arr.source >= diagrams.size() || arr.target >= diagrams.size())
      throw Error(ErrorKind::InvalidDiagram, "arrow " + std::to_string(k) + " has a bad endpoint");
    const auto& src = diagrams[arr.source];
    const auto& tgt = diagrams[arr.target];
    if ((arr.map.source() != src && !(*arr.map.source() == *src)) ||
        (arr.map.target() != tgt && !(*arr.map.target() == *tgt)))
      throw Error(ErrorKind::NotNatural, "arrow " + std::to_string(k) +
                                             " does not match its endpoint objects");
    require_natural(arr.map, "arrow " + d.objects[arr.source].name + " -> " +
                                 d.objects[arr.target].name);
  }

  std::array<CarrierQuotient, 6> cq;
  for (SchemaObject o : kSchemaObjects) {
    CarrierQuotient& q = cq[index(o)];
    std::vector<std::size_t> offset;
    std::vector<Id> ids;
    for (std::size_t j = 0; j < diagrams.size(); ++j) {
      offset.push_back(ids.size());
      for (const auto& x : diagrams[j]->prim().carrier(o)) {
        q.elements.emplace_back(j, x);
        ids.push_back(x);
      }
    }
    UnionFind uf(ids.size());
    for (const auto& arr : d.arrows) {
      const Carrier& src = diagrams[arr.source]->prim().carrier(o);
      const Carrier& tgt = diagrams[arr.target]->prim().carrier(o);
      for (std::size_t i = 0; i < src.size(); ++i) {
        std::size_t pos = *tgt.position(arr.map.component(o).at(src.ids()[i]));
        uf.unite(offset[arr.source] + i, offset[arr.target] + pos);
      }
    }
    Quotient qt = quotient(ids, uf);
    q.names = std::move(qt.names);
    q.class_of = std::move(qt.class_of);
    q.lookup.resize(diagrams.size());
    for (std::size_t i = 0; i < q.elements.size(); ++i)
      q.lookup[q.elements[i].first].emplace(q.elements[i].second, q.class_of[i]);
  }
  Assembled a = assemble(diagrams, cq, FlowRule::FirstSingleton, cfg);
  return ColimitResult{a.apex, std::move(a.legs)};
}

}  // namespace sfd
