#pragma once

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "stockflow/diagram.hpp"

namespace sfd {

enum class Method : std::uint8_t { Euler, Rk4 };

struct SimConfig {
  double t0 = 0.0;
  double t1 = 10.0;
  double dt = 0.01;
  Method method = Method::Rk4;
  std::unordered_map<Id, double> init;
  /// Time series for the half links (links with no source stock), over `t`.
  std::unordered_map<Id, FlowExpr> exogenous;
  bool clamp_nonnegative = false;
};

using StockState = std::unordered_map<Id, double>;

/// Throws Error{InvalidConfig}, Error{UnknownStock} or Error{MissingExogenous}.
void validate_config(const StockFlowDiagram& X, const SimConfig& cfg);

/// Link values come from the link's source stock, or from exo at time t for
/// half links. Errors carry the flow id.
std::unordered_map<Id, double> flow_rates(const StockFlowDiagram& X, const StockState& state,
                                          const std::unordered_map<Id, FlowExpr>& exo, double t);

/// One step of cfg.method with step cfg.dt starting at time t.
StockState step(const StockFlowDiagram& X, const StockState& state, const SimConfig& cfg, double t);

struct Trajectory {
  std::vector<double> times;
  std::vector<Id> stocks;
  std::vector<Id> flows;
  std::vector<std::vector<double>> stock_values;  // [time][stock]
  std::vector<std::vector<double>> flow_values;   // [time][flow]

  /// Column of one stock over time. Throws Error{UnknownStock}.
  std::vector<double> stock(const Id& s) const;
};

/// Fixed steps from t0; the last step is shortened to end exactly at t1.
Trajectory simulate(const StockFlowDiagram& X, const SimConfig& cfg);

/// Header "t,<stocks>,<flows>", one row per time, shortest round-trip numbers.
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace sfd
