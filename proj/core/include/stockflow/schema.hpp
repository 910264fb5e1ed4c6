#pragma once

// The schema category Fl and primitive stock & flow diagrams as functors
// Fl -> FinSet.
//
//            Outflow
//       up /        \ out
//    Stock            Flow
//     down \        / in
//            Inflow
//      st |              | fl
//    CTLink ----ct----> Link

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sfd {

using Id = std::string;

enum class SchemaObject : std::uint8_t { Stock, Flow, Inflow, Outflow, Link, CTLink };
enum class SchemaArrow : std::uint8_t { Up, Out, Down, In, St, Ct, Fl };

inline constexpr std::array<SchemaObject, 6> kSchemaObjects{
    SchemaObject::Stock,   SchemaObject::Flow, SchemaObject::Inflow,
    SchemaObject::Outflow, SchemaObject::Link, SchemaObject::CTLink};

inline constexpr std::array<SchemaArrow, 7> kSchemaArrows{
    SchemaArrow::Up, SchemaArrow::Out, SchemaArrow::Down, SchemaArrow::In,
    SchemaArrow::St, SchemaArrow::Ct,  SchemaArrow::Fl};

constexpr std::size_t index(SchemaObject o) { return static_cast<std::size_t>(o); }
constexpr std::size_t index(SchemaArrow a) { return static_cast<std::size_t>(a); }

constexpr SchemaObject domain(SchemaArrow a) {
  switch (a) {
    case SchemaArrow::Up:
    case SchemaArrow::Out: return SchemaObject::Outflow;
    case SchemaArrow::Down:
    case SchemaArrow::In: return SchemaObject::Inflow;
    case SchemaArrow::St:
    case SchemaArrow::Ct: return SchemaObject::CTLink;
    case SchemaArrow::Fl: return SchemaObject::Link;
  }
  return SchemaObject::Stock;
}

constexpr SchemaObject codomain(SchemaArrow a) {
  switch (a) {
    case SchemaArrow::Up:
    case SchemaArrow::Down:
    case SchemaArrow::St: return SchemaObject::Stock;
    case SchemaArrow::Out:
    case SchemaArrow::In:
    case SchemaArrow::Fl: return SchemaObject::Flow;
    case SchemaArrow::Ct: return SchemaObject::Link;
  }
  return SchemaObject::Stock;
}

std::string_view to_string(SchemaObject o);
std::string_view to_string(SchemaArrow a);

/// Finite set of identifiers; iteration follows insertion order.
class Carrier {
 public:
  Carrier() = default;
  Carrier(std::initializer_list<Id> ids);

  /// Throws Error{DuplicateId} if the id is already present.
  void insert(Id id);
  bool contains(const Id& id) const { return index_.count(id) != 0; }
  std::optional<std::size_t> position(const Id& id) const;

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<Id>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  friend bool operator==(const Carrier& a, const Carrier& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<Id> ids_;
  std::unordered_map<Id, std::size_t> index_;
};

/// A function between finite sets, stored as an id -> id table.
class FinMap {
 public:
  FinMap() = default;
  FinMap(std::initializer_list<std::pair<const Id, Id>> entries) : table_(entries) {}

  void set(const Id& from, Id to) { table_[from] = std::move(to); }
  void erase(const Id& from) { table_.erase(from); }
  const Id* find(const Id& from) const;
  /// Throws Error{InvalidDiagram} when undefined.
  const Id& at(const Id& from) const;
  bool defines(const Id& from) const { return table_.count(from) != 0; }
  std::size_t size() const { return table_.size(); }
  const std::unordered_map<Id, Id>& table() const { return table_; }

  friend bool operator==(const FinMap& a, const FinMap& b) { return a.table_ == b.table_; }

 private:
  std::unordered_map<Id, Id> table_;
};

/// A functor Fl -> FinSet. Nothing is enforced on mutation; call
/// validate_primitive to find out whether it is a legal diagram.
class PrimitiveDiagram {
 public:
  Carrier& carrier(SchemaObject o) { return carriers_[index(o)]; }
  const Carrier& carrier(SchemaObject o) const { return carriers_[index(o)]; }
  FinMap& map(SchemaArrow a) { return maps_[index(a)]; }
  const FinMap& map(SchemaArrow a) const { return maps_[index(a)]; }

  const Carrier& stocks() const { return carrier(SchemaObject::Stock); }
  const Carrier& flows() const { return carrier(SchemaObject::Flow); }
  const Carrier& inflows() const { return carrier(SchemaObject::Inflow); }
  const Carrier& outflows() const { return carrier(SchemaObject::Outflow); }
  const Carrier& links() const { return carrier(SchemaObject::Link); }
  const Carrier& ctlinks() const { return carrier(SchemaObject::CTLink); }

  PrimitiveDiagram& add_stock(Id stock);
  PrimitiveDiagram& add_flow(Id flow);
  /// Inflow incidence: `flow` empties into `stock`.
  PrimitiveDiagram& add_inflow(Id incidence, const Id& flow, const Id& stock);
  /// Outflow incidence: `flow` drains `stock`.
  PrimitiveDiagram& add_outflow(Id incidence, const Id& flow, const Id& stock);
  PrimitiveDiagram& add_link(Id link, const Id& flow);
  /// Marks `link` as originating at `stock`.
  PrimitiveDiagram& add_ctlink(Id ctlink, const Id& link, const Id& stock);

  const Id& apply(SchemaArrow a, const Id& x) const { return map(a).at(x); }

  /// Elements of dom(a) sent to y, in carrier order.
  std::vector<Id> preimage(SchemaArrow a, const Id& y) const;

  std::optional<Id> inflow_of(const Id& flow) const;
  std::optional<Id> outflow_of(const Id& flow) const;
  std::optional<Id> ctlink_of(const Id& link) const;
  /// Target stock of the flow's inflow incidence, if any.
  std::optional<Id> downstream_stock(const Id& flow) const;
  /// Source stock of the flow's outflow incidence, if any.
  std::optional<Id> upstream_stock(const Id& flow) const;
  /// Source stock of a link, empty for half links.
  std::optional<Id> link_source(const Id& link) const;
  std::vector<Id> links_of(const Id& flow) const { return preimage(SchemaArrow::Fl, flow); }

  friend bool operator==(const PrimitiveDiagram& a, const PrimitiveDiagram& b) {
    return a.carriers_ == b.carriers_ && a.maps_ == b.maps_;
  }

 private:
  std::array<Carrier, 6> carriers_;
  std::array<FinMap, 7> maps_;
};

struct Violation {
  std::string kind;
  Id id;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Number of items the check actually examined (flows, squares, ...).
  std::size_t checked = 0;

  bool ok() const { return violations.empty(); }
  void add(std::string kind, Id id, std::string message);
  void merge(const ValidationReport& other);
  std::string summary() const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

ValidationReport validate_primitive(const PrimitiveDiagram& d);

struct HalfFlows {
  std::set<Id> inflow_only;
  std::set<Id> outflow_only;
};

HalfFlows half_flows(const PrimitiveDiagram& d);

/// No half flows and every flow has at least one incidence.
bool is_closed(const PrimitiveDiagram& d);

}  // namespace sfd
