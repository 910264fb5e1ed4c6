#include "stockflow/schema.hpp"

#include <sstream>

#include "stockflow/error.hpp"

namespace sfd {

std::string_view to_string(SchemaObject o) {
  switch (o) {
    case SchemaObject::Stock: return "Stock";
    case SchemaObject::Flow: return "Flow";
    case SchemaObject::Inflow: return "Inflow";
    case SchemaObject::Outflow: return "Outflow";
    case SchemaObject::Link: return "Link";
    case SchemaObject::CTLink: return "CTLink";
  }
  return "?";
}

std::string_view to_string(SchemaArrow a) {
  switch (a) {
    case SchemaArrow::Up: return "up";
    case SchemaArrow::Out: return "out";
    case SchemaArrow::Down: return "down";
    case SchemaArrow::In: return "in";
    case SchemaArrow::St: return "st";
    case SchemaArrow::Ct: return "ct";
    case SchemaArrow::Fl: return "fl";
  }
  return "?";
}

Carrier::Carrier(std::initializer_list<Id> ids) {
  for (const auto& id : ids) insert(id);
}

void Carrier::insert(Id id) {
  if (contains(id)) throw Error(ErrorKind::DuplicateId, "duplicate id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
}

std::optional<std::size_t> Carrier::position(const Id& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Id* FinMap::find(const Id& from) const {
  auto it = table_.find(from);
  return it == table_.end() ? nullptr : &it->second;
}

const Id& FinMap::at(const Id& from) const {
  auto it = table_.find(from);
  if (it == table_.end())
    throw Error(ErrorKind::InvalidDiagram, "map undefined on '" + from + "'");
  return it->second;
}

PrimitiveDiagram& PrimitiveDiagram::add_stock(Id stock) {
  carrier(SchemaObject::Stock).insert(std::move(stock));
  return *this;
}

PrimitiveDiagram& PrimitiveDiagram::add_flow(Id flow) {
  carrier(SchemaObject::Flow).insert(std::move(flow));
  return *this;
}

PrimitiveDiagram& PrimitiveDiagram::add_inflow(Id incidence, const Id& flow, const Id& stock) {
  carrier(SchemaObject::Inflow).insert(incidence);
  map(SchemaArrow::In).set(incidence, flow);
  map(SchemaArrow::Down).set(incidence, stock);
  return *this;
}

PrimitiveDiagram& PrimitiveDiagram::add_outflow(Id incidence, const Id& flow, const Id& stock) {
  carrier(SchemaObject::Outflow).insert(incidence);
  map(SchemaArrow::Out).set(incidence, flow);
  map(SchemaArrow::Up).set(incidence, stock);
  return *this;
}

PrimitiveDiagram& PrimitiveDiagram::add_link(Id link, const Id& flow) {
  carrier(SchemaObject::Link).insert(link);
  map(SchemaArrow::Fl).set(link, flow);
  return *this;
}

PrimitiveDiagram& PrimitiveDiagram::add_ctlink(Id ctlink, const Id& link, const Id& stock) {
  carrier(SchemaObject::CTLink).insert(ctlink);
  map(SchemaArrow::Ct).set(ctlink, link);
  map(SchemaArrow::St).set(ctlink, stock);
  return *this;
}

std::vector<Id> PrimitiveDiagram::preimage(SchemaArrow a, const Id& y) const {
  std::vector<Id> out;
  const FinMap& m = map(a);
  for (const auto& x : carrier(domain(a))) {
    const Id* image = m.find(x);
    if (image != nullptr && *image == y) out.push_back(x);
  }
  return out;
}

namespace {

std::optional<Id> first_of(std::vector<Id> ids) {
  if (ids.empty()) return std::nullopt;
  return std::move(ids.front());
}

}  // namespace

std::optional<Id> PrimitiveDiagram::inflow_of(const Id& flow) const {
  return first_of(preimage(SchemaArrow::In, flow));
}

std::optional<Id> PrimitiveDiagram::outflow_of(const Id& flow) const {
  return first_of(preimage(SchemaArrow::Out, flow));
}

std::optional<Id> PrimitiveDiagram::ctlink_of(const Id& link) const {
  return first_of(preimage(SchemaArrow::Ct, link));
}

std::optional<Id> PrimitiveDiagram::downstream_stock(const Id& flow) const {
  auto inc = inflow_of(flow);
  if (!inc) return std::nullopt;
  return apply(SchemaArrow::Down, *inc);
}

std::optional<Id> PrimitiveDiagram::upstream_stock(const Id& flow) const {
  auto inc = outflow_of(flow);
  if (!inc) return std::nullopt;
  return apply(SchemaArrow::Up, *inc);
}

std::optional<Id> PrimitiveDiagram::link_source(const Id& link) const {
  auto ct = ctlink_of(link);
  if (!ct) return std::nullopt;
  return apply(SchemaArrow::St, *ct);
}

void ValidationReport::add(std::string kind, Id id, std::string message) {
  violations.push_back(Violation{std::move(kind), std::move(id), std::move(message)});
}

void ValidationReport::merge(const ValidationReport& other) {
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  checked += other.checked;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (const auto& v : violations) os << v.kind << " [" << v.id << "]: " << v.message << '\n';
  return os.str();
}

ValidationReport validate_primitive(const PrimitiveDiagram& d) {
  ValidationReport report;
  for (SchemaArrow a : kSchemaArrows) {
    const Carrier& dom = d.carrier(domain(a));
    const Carrier& cod = d.carrier(codomain(a));
    const FinMap& m = d.map(a);
    std::string name(to_string(a));
    for (const auto& x : dom) {
      ++report.checked;
      const Id* y = m.find(x);
      if (y == nullptr) {
        report.add("totality:" + name, x, name + " is undefined on '" + x + "'");
      } else if (!cod.contains(*y)) {
        report.add("codomain:" + name, x,
                   name + "('" + x + "') = '" + *y + "' is not in " +
                       std::string(to_string(codomain(a))));
      }
    }
    for (const auto& [x, y] : m.table()) {
      if (!dom.contains(x))
        report.add("domain:" + name, x,
                   name + " is defined on '" + x + "' which is not in " +
                       std::string(to_string(domain(a))));
    }
  }
  for (SchemaArrow a : {SchemaArrow::In, SchemaArrow::Out, SchemaArrow::Ct}) {
    std::unordered_map<Id, Id> seen;
    std::string name(to_string(a));
    for (const auto& x : d.carrier(domain(a))) {
      const Id* y = d.map(a).find(x);
      if (y == nullptr) continue;
      auto [it, fresh] = seen.emplace(*y, x);
      if (!fresh)
        report.add("injectivity:" + name, x,
                   name + " sends both '" + it->second + "' and '" + x + "' to '" + *y + "'");
    }
  }
  return report;
}

HalfFlows half_flows(const PrimitiveDiagram& d) {
  std::set<Id> in_image;
  std::set<Id> out_image;
  for (const auto& i : d.inflows()) in_image.insert(d.apply(SchemaArrow::In, i));
  for (const auto& o : d.outflows()) out_image.insert(d.apply(SchemaArrow::Out, o));
  HalfFlows result;
  for (const auto& f : in_image)
    if (out_image.count(f) == 0) result.inflow_only.insert(f);
  for (const auto& f : out_image)
    if (in_image.count(f) == 0) result.outflow_only.insert(f);
  return result;
}

bool is_closed(const PrimitiveDiagram& d) {
  HalfFlows h = half_flows(d);
  if (!h.inflow_only.empty() || !h.outflow_only.empty()) return false;
  for (const auto& f : d.flows()) {
    if (!d.inflow_of(f) && !d.outflow_of(f)) return false;
  }
  return true;
}

}  // namespace sfd
