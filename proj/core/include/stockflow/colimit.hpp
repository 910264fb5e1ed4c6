#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stockflow/diagram.hpp"

namespace sfd {

/// Pushout B +_A C of finite sets. Classes are named after their first member
/// in B-then-C order; a name already taken by an earlier class gets `~k`.
struct FinSetPushout {
  Carrier apex;
  FinMap inj_b;
  FinMap inj_c;
  /// The disjoint union B + C (side 0 = B, 1 = C) and the apex position of each element.
  std::vector<std::pair<int, Id>> elements;
  std::vector<std::size_t> class_of;
};

/// Throws Error{NotNatural} if f or g is undefined somewhere on A or leaves its codomain.
FinSetPushout finset_pushout(const Carrier& A, const Carrier& B, const Carrier& C, const FinMap& f,
                             const FinMap& g);

struct SpanOfDiagrams {
  DiagramPtr apex;
  DiagramMorphism s1;  // apex -> Z
  DiagramMorphism s2;  // apex -> Y
};

struct PushoutResult {
  DiagramPtr apex;
  DiagramMorphism p1;  // Z -> apex
  DiagramMorphism p2;  // Y -> apex
};

/// Pointwise pushout with the flow functions of the gluing rule: a class with
/// apex flows takes the Z-side sum (checked against the Y-side sum), any
/// other class inherits its single member's function. The legs are certified
/// under cfg when they pass.
/// Throws Error{NotNatural}, Error{NotPrimitive} or Error{InconsistentFlowFns}.
PushoutResult presheaf_pushout(const SpanOfDiagrams& span, const EqCheckConfig& cfg = {});

struct ElObject {
  std::string name;
  DiagramPtr diagram;
};

struct ElArrow {
  std::size_t source;
  std::size_t target;
  DiagramMorphism map;
};

/// A diagram of stock & flow diagrams over a free index category.
struct ElDiagram {
  std::vector<ElObject> objects;
  std::vector<ElArrow> arrows;

  std::size_t add_object(std::string name, DiagramPtr diagram);
  void add_arrow(std::size_t source, std::size_t target, DiagramMorphism map);
  std::size_t find(const std::string& name) const;
};

struct ColimitResult {
  DiagramPtr apex;
  std::vector<DiagramMorphism> legs;  // one per object, same order
};

/// Coequalizer of the two maps out of the coproduct of arrow sources into the
/// coproduct of objects, computed per carrier. Names follow the same rule as
/// finset_pushout over objects in order. A flow class takes its function from
/// the first object in which it has exactly one preimage (else the first
/// object meeting it); candidates from other singleton-preimage objects must
/// agree numerically.
/// Throws Error{NotNatural}, Error{NotPrimitive} or Error{InconsistentFlowFns}.
ColimitResult colimit_el(const ElDiagram& d, const EqCheckConfig& cfg = {});

}  // namespace sfd
