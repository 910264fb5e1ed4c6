#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "stockflow/stockflow.hpp"

namespace sfd::testing {

std::filesystem::path fixture_path(const std::string& name);
DiagramPtr load_fixture(const std::string& name);
std::string read_fixture_text(const std::string& name);

/// Builds a diagram from compact literals. Incidences are named after their
/// flow ("in:<f>", "out:<f>") and CTLinks after their link ("ct:<l>").
struct FlowSpec {
  Id id;
  std::string fn;
  std::optional<Id> from;
  std::optional<Id> to;
};
struct LinkSpec {
  Id id;
  Id flow;
  std::optional<Id> source;
};
StockFlowDiagram build(const std::vector<Id>& stocks, const std::vector<FlowSpec>& flows,
                       const std::vector<LinkSpec>& links);

StockFlowDiagram sir();

struct RandomShape {
  int max_stocks = 6;
  int max_flows = 10;
  int max_links_per_flow = 3;
  /// Probability that a generated flow has both incidences.
  double p_stock_to_stock = 0.6;
};

/// Polynomial of degree <= 2 in the given links with coefficients in [0.01, 1].
FlowExpr random_polynomial(std::mt19937_64& rng, const std::vector<Id>& links);

StockFlowDiagram random_diagram(std::mt19937_64& rng, const RandomShape& shape = {},
                                const std::string& prefix = "");

struct RandomSpan {
  DiagramPtr apex;
  DiagramPtr z;
  DiagramPtr y;
  DiagramMorphism s1;  // apex -> z
  DiagramMorphism s2;  // apex -> y
};

/// A span of valid morphisms with every carrier of size <= 4. Half of the
/// spans glue along a flow-free apex (arbitrary stock maps), the others along
/// a sub-diagram of z that also sits inside y.
RandomSpan random_span(std::mt19937_64& rng);

// ---- oracles ---------------------------------------------------------------

/// Sampling comparison with its own generator and point distribution.
bool oracle_same_function(const FlowExpr& a, const FlowExpr& b, std::uint64_t seed = 7,
                          int samples = 100, double tol = 1e-9);

/// Brute-force validity of a primitive diagram: maps total and in range,
/// in / out / ct injective.
bool oracle_valid(const PrimitiveDiagram& d);

/// Every component bijective, every square commuting, flow functions agreeing
/// under the link bijection.
bool oracle_is_iso(const DiagramMorphism& F);

/// Naturality by enumeration of every square.
bool oracle_natural(const DiagramMorphism& F);

/// The flow condition recomputed from scratch for every target flow with a
/// nonempty preimage.
bool oracle_flow_condition(const DiagramMorphism& F);

/// dS/dt from the diagram structure: inflows minus outflows.
std::map<Id, double> oracle_rhs(const StockFlowDiagram& X, const std::map<Id, double>& state);

enum class OracleMethod { Euler, Rk4 };

/// Fixed-step integration with n equal steps over [0, t1]; one state per step.
std::vector<std::map<Id, double>> oracle_integrate(const StockFlowDiagram& X,
                                                   std::map<Id, double> init, double t1, long n,
                                                   OracleMethod method);

struct DotCounts {
  int boxes = 0;
  int midpoints = 0;
  int clouds = 0;
  int flow_edges = 0;
  int flow_tails = 0;
  int link_edges = 0;
  int half_link_points = 0;
};
DotCounts count_dot(const std::string& dot);

/// The counts predicted from carrier sizes.
DotCounts expected_dot(const PrimitiveDiagram& p);

}  // namespace sfd::testing
