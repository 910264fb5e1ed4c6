#include "stockflow/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "stockflow/error.hpp"

namespace sfd {

namespace {

std::string format_number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// The diagram compiled to index form: derivatives and rates of a state vector.
class Model {
 public:
  Model(const StockFlowDiagram& X, const std::unordered_map<Id, FlowExpr>& exo) {
    const PrimitiveDiagram& p = X.prim();
    for (std::size_t i = 0; i < X.stocks().size(); ++i) stock_index_.emplace(X.stocks().ids()[i], i);
    for (const auto& f : X.flows()) {
      CompiledFlow cf{f, &X.flow_fn(f), {}, {}, {}, std::nullopt, std::nullopt};
      for (const auto& l : p.links_of(f)) {
        if (auto src = p.link_source(l)) {
          cf.stock_links.emplace_back(l, stock_index_.at(*src));
        } else {
          auto it = exo.find(l);
          if (it == exo.end())
            throw Error(ErrorKind::MissingExogenous,
                        "half link '" + l + "' of flow '" + f + "' has no exogenous input");
          cf.exo_links.emplace_back(l, &it->second);
        }
        cf.env.values.emplace(l, 0.0);
      }
      if (auto s = p.downstream_stock(f)) cf.down = stock_index_.at(*s);
      if (auto s = p.upstream_stock(f)) cf.up = stock_index_.at(*s);
      flows_.push_back(std::move(cf));
    }
  }

  void rates(const std::vector<double>& state, double t, std::vector<double>& out) {
    out.resize(flows_.size());
    LinkEnv time_env;
    time_env.time = t;
    for (std::size_t k = 0; k < flows_.size(); ++k) {
      CompiledFlow& cf = flows_[k];
      try {
        for (const auto& [l, i] : cf.stock_links) cf.env.values[l] = state[i];
        for (const auto& [l, e] : cf.exo_links) cf.env.values[l] = evaluate(*e, time_env);
        out[k] = evaluate(*cf.fn, cf.env);
      } catch (const Error& e) {
        throw e.with_context("flow '" + cf.id + "'");
      }
    }
  }

  void derivative(const std::vector<double>& state, double t, std::vector<double>& d) {
    rates(state, t, scratch_);
    d.assign(state.size(), 0.0);
    for (std::size_t k = 0; k < flows_.size(); ++k) {
      if (flows_[k].down) d[*flows_[k].down] += scratch_[k];
      if (flows_[k].up) d[*flows_[k].up] -= scratch_[k];
    }
  }

  void advance(std::vector<double>& y, double t, double h, Method method) {
    const std::size_t n = y.size();
    if (method == Method::Euler) {
      derivative(y, t, k1_);
      for (std::size_t i = 0; i < n; ++i) y[i] += h * k1_[i];
      return;
    }
    tmp_.resize(n);
    derivative(y, t, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    derivative(tmp_, t + 0.5 * h, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    derivative(tmp_, t + 0.5 * h, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    derivative(tmp_, t + h, k4_);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  struct CompiledFlow {
    Id id;
    const FlowExpr* fn;
    std::vector<std::pair<Id, std::size_t>> stock_links;
    std::vector<std::pair<Id, const FlowExpr*>> exo_links;
    LinkEnv env;
    std::optional<std::size_t> down;
    std::optional<std::size_t> up;
  };

  std::unordered_map<Id, std::size_t> stock_index_;
  std::vector<CompiledFlow> flows_;
  std::vector<double> scratch_, k1_, k2_, k3_, k4_, tmp_;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<double> to_vector(const StockFlowDiagram& X, const StockState& state) {
  std::vector<double> y;
  for (const auto& s : X.stocks()) {
    auto it = state.find(s);
    if (it == state.end()) throw Error(ErrorKind::InvalidConfig, "no value for stock '" + s + "'");
    y.push_back(it->second);
  }
  return y;
}

}  // namespace

void validate_config(const StockFlowDiagram& X, const SimConfig& cfg) {
  if (!std::isfinite(cfg.t0) || !std::isfinite(cfg.t1) || !std::isfinite(cfg.dt))
    throw Error(ErrorKind::InvalidConfig, "t0, t1 and dt must be finite");
  if (!(cfg.dt > 0)) throw Error(ErrorKind::InvalidConfig, "dt must be positive");
  if (!(cfg.t1 > cfg.t0)) throw Error(ErrorKind::InvalidConfig, "t1 must exceed t0");
  for (const auto& [s, v] : cfg.init) {
    if (!X.stocks().contains(s))
      throw Error(ErrorKind::UnknownStock, "initial value given for unknown stock '" + s + "'");
    if (!std::isfinite(v))
      throw Error(ErrorKind::InvalidConfig, "initial value of '" + s + "' is not finite");
  }
  for (const auto& s : X.stocks())
    if (cfg.init.count(s) == 0)
      throw Error(ErrorKind::InvalidConfig, "no initial value for stock '" + s + "'");
  const PrimitiveDiagram& p = X.prim();
  for (const auto& l : X.links())
    if (!p.link_source(l) && cfg.exogenous.count(l) == 0)
      throw Error(ErrorKind::MissingExogenous, "half link '" + l + "' has no exogenous input");
  for (const auto& [l, e] : cfg.exogenous) {
    if (!X.links().contains(l))
      throw Error(ErrorKind::InvalidConfig, "exogenous input for unknown link '" + l + "'");
    if (p.link_source(l))
      throw Error(ErrorKind::InvalidConfig,
                  "link '" + l + "' reads a stock and cannot take an exogenous input");
    if (!free_links(e).empty())
      throw Error(ErrorKind::InvalidConfig,
                  "exogenous input for '" + l + "' may only use the time variable t");
  }
}

std::unordered_map<Id, double> flow_rates(const StockFlowDiagram& X, const StockState& state,
                                          const std::unordered_map<Id, FlowExpr>& exo, double t) {
  Model m(X, exo);
  std::vector<double> rates;
  m.rates(to_vector(X, state), t, rates);
  std::unordered_map<Id, double> out;
  for (std::size_t k = 0; k < rates.size(); ++k) out.emplace(X.flows().ids()[k], rates[k]);
  return out;
}

StockState step(const StockFlowDiagram& X, const StockState& state, const SimConfig& cfg,
                double t) {
  Model m(X, cfg.exogenous);
  std::vector<double> y = to_vector(X, state);
  m.advance(y, t, cfg.dt, cfg.method);
  StockState out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = cfg.clamp_nonnegative ? std::max(0.0, y[i]) : y[i];
    out.emplace(X.stocks().ids()[i], v);
  }
  return out;
}

std::vector<double> Trajectory::stock(const Id& s) const {
  auto it = std::find(stocks.begin(), stocks.end(), s);
  if (it == stocks.end()) throw Error(ErrorKind::UnknownStock, "no stock '" + s + "' in trajectory");
  std::size_t i = static_cast<std::size_t>(it - stocks.begin());
  std::vector<double> col;
  col.reserve(stock_values.size());
  for (const auto& row : stock_values) col.push_back(row[i]);
  return col;
}

Trajectory simulate(const StockFlowDiagram& X, const SimConfig& cfg) {
  validate_config(X, cfg);
  Model m(X, cfg.exogenous);
  Trajectory traj;
  traj.stocks = X.stocks().ids();
  traj.flows = X.flows().ids();

  const double span = cfg.t1 - cfg.t0;
  auto steps = static_cast<std::size_t>(std::llround(span / cfg.dt));
  if (steps == 0 || std::abs(static_cast<double>(steps) * cfg.dt - span) > 1e-9 * std::max(1.0, span))
    steps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));

  std::vector<double> y = to_vector(X, cfg.init);
  std::vector<double> rates;
  traj.times.reserve(steps + 1);
  traj.stock_values.reserve(steps + 1);
  traj.flow_values.reserve(steps + 1);
  for (std::size_t k = 0;; ++k) {
    double t = k == steps ? cfg.t1 : cfg.t0 + static_cast<double>(k) * cfg.dt;
    try {
      m.rates(y, t, rates);
    } catch (const Error& e) {
      throw e.with_context("t=" + format_number(t));
    }
    traj.times.push_back(t);
    traj.stock_values.push_back(y);
    traj.flow_values.push_back(rates);
    if (k == steps) break;
    double next = k + 1 == steps ? cfg.t1 : cfg.t0 + static_cast<double>(k + 1) * cfg.dt;
    try {
      m.advance(y, t, next - t, cfg.method);
    } catch (const Error& e) {
      throw e.with_context("t=" + format_number(t));
    }
    if (cfg.clamp_nonnegative)
      for (auto& v : y) v = std::max(0.0, v);
  }
  return traj;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (const auto& s : traj.stocks) os << ',' << csv_field(s);
  for (const auto& f : traj.flows) os << ',' << csv_field(f);
  os << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << format_number(traj.times[k]);
    for (double v : traj.stock_values[k]) os << ',' << format_number(v);
    for (double v : traj.flow_values[k]) os << ',' << format_number(v);
    os << '\n';
  }
}

}  // namespace sfd
