#pragma once

#include <array>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "stockflow/flow_expr.hpp"
#include "stockflow/schema.hpp"

namespace sfd {

/// A primitive diagram together with one flow function per flow. Instances
/// are only produced by make_diagram, so they are always valid.
class StockFlowDiagram {
 public:
  StockFlowDiagram() = default;

  const PrimitiveDiagram& prim() const { return prim_; }
  const FlowExpr& flow_fn(const Id& flow) const;
  const std::unordered_map<Id, FlowExpr>& flow_fns() const { return fns_; }

  const Carrier& stocks() const { return prim_.stocks(); }
  const Carrier& flows() const { return prim_.flows(); }
  const Carrier& links() const { return prim_.links(); }

  friend bool operator==(const StockFlowDiagram& a, const StockFlowDiagram& b) {
    return a.prim_ == b.prim_ && a.fns_ == b.fns_;
  }

 private:
  friend StockFlowDiagram make_diagram(PrimitiveDiagram, std::unordered_map<Id, FlowExpr>);
  PrimitiveDiagram prim_;
  std::unordered_map<Id, FlowExpr> fns_;
};

using DiagramPtr = std::shared_ptr<const StockFlowDiagram>;

/// Throws Error{InvalidDiagram} (with the report), Error{MissingFlowFn},
/// Error{ForeignLink} or Error{TimeInFlowFn}.
StockFlowDiagram make_diagram(PrimitiveDiagram prim, std::unordered_map<Id, FlowExpr> fns);

inline DiagramPtr share(StockFlowDiagram d) {
  return std::make_shared<const StockFlowDiagram>(std::move(d));
}

/// Six component maps between two diagrams. The certified flag records the
/// configuration under which both morphism checks last passed.
class DiagramMorphism {
 public:
  DiagramMorphism(DiagramPtr source, DiagramPtr target);

  const DiagramPtr& source() const { return source_; }
  const DiagramPtr& target() const { return target_; }

  FinMap& component(SchemaObject o) { return components_[index(o)]; }
  const FinMap& component(SchemaObject o) const { return components_[index(o)]; }
  const Id& operator()(SchemaObject o, const Id& x) const { return component(o).at(x); }

  /// Runs check_naturality and check_flow_condition; stamps the config on success.
  ValidationReport certify(const EqCheckConfig& cfg);
  const std::optional<EqCheckConfig>& certified() const { return certified_; }

  /// Completes the Inflow, Outflow and CTLink components from the Stock, Flow
  /// and Link components (they are forced because in, out and ct are monic).
  /// Throws Error{NotNatural} when no natural completion exists.
  void induce_incidences();

 private:
  DiagramPtr source_;
  DiagramPtr target_;
  std::array<FinMap, 6> components_;
  std::optional<EqCheckConfig> certified_;
};

/// Reports every failing square (and every undefined or out-of-range component value).
ValidationReport check_naturality(const DiagramMorphism& F);

/// For every target flow g with nonempty preimage, compares psi_g against the
/// sum of the preimage flow functions precomposed with the link component.
/// Flows with empty preimage are skipped. `checked` counts compared flows.
ValidationReport check_flow_condition(const DiagramMorphism& F, const EqCheckConfig& cfg);

/// G after F. Throws Error{NotNatural} if F's target is not G's source.
DiagramMorphism compose(const DiagramMorphism& F, const DiagramMorphism& G);

DiagramMorphism identity(const DiagramPtr& X);

/// Stock carrier S, everything else empty.
StockFlowDiagram disc(const std::vector<Id>& stocks);

/// The morphism Disc_{X(Stock)} -> X that is the identity on stocks.
DiagramMorphism canonical_disc_map(const DiagramPtr& X);

struct IsoSearchConfig {
  EqCheckConfig eq;
  std::size_t max_carrier = 64;
};

/// Finds an isomorphism X -> Y (bijective components, natural, flow functions
/// agreeing under the link bijection), or nullopt. Throws Error{TooLarge} when
/// a carrier exceeds the search bound.
std::optional<DiagramMorphism> iso_check(const DiagramPtr& X, const DiagramPtr& Y,
                                         const IsoSearchConfig& cfg = {});

/// Inverse of a bijective morphism.
DiagramMorphism invert(const DiagramMorphism& F);

}  // namespace sfd
