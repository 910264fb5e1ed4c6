#include "support.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

namespace sfd::testing {

std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(SFD_FIXTURE_DIR) / name;
}

DiagramPtr load_fixture(const std::string& name) { return share(load(fixture_path(name))); }

std::string read_fixture_text(const std::string& name) { return read_file(fixture_path(name)); }

StockFlowDiagram build(const std::vector<Id>& stocks, const std::vector<FlowSpec>& flows,
                       const std::vector<LinkSpec>& links) {
  PrimitiveDiagram p;
  std::unordered_map<Id, FlowExpr> fns;
  for (const auto& s : stocks) p.add_stock(s);
  for (const auto& f : flows) {
    p.add_flow(f.id);
    if (f.to) p.add_inflow("in:" + f.id, f.id, *f.to);
    if (f.from) p.add_outflow("out:" + f.id, f.id, *f.from);
    fns.emplace(f.id, parse(f.fn));
  }
  for (const auto& l : links) {
    p.add_link(l.id, l.flow);
    if (l.source) p.add_ctlink("ct:" + l.id, l.id, *l.source);
  }
  return make_diagram(std::move(p), std::move(fns));
}

StockFlowDiagram sir() {
  return build({"S", "I", "R"},
               {{"Infection", "0.3 * l1 * l2", "S", "I"}, {"Recovery", "0.1 * l3", "I", "R"}},
               {{"l1", "Infection", "S"}, {"l2", "Infection", "I"}, {"l3", "Recovery", "I"}});
}

namespace {

double coefficient(std::mt19937_64& rng) {
  // Two decimals keeps the printed form short and exact enough to round-trip.
  std::uniform_int_distribution<int> d(1, 100);
  return d(rng) / 100.0;
}

}  // namespace

FlowExpr random_polynomial(std::mt19937_64& rng, const std::vector<Id>& links) {
  std::bernoulli_distribution coin(0.5);
  FlowExpr e = FlowExpr::number(coefficient(rng));
  for (std::size_t i = 0; i < links.size(); ++i) {
    e = e + FlowExpr::number(coefficient(rng)) * FlowExpr::var(links[i]);
    if (coin(rng)) {
      std::uniform_int_distribution<std::size_t> pick(0, links.size() - 1);
      e = e + FlowExpr::number(coefficient(rng)) * FlowExpr::var(links[i]) *
                  FlowExpr::var(links[pick(rng)]);
    }
  }
  return e;
}

StockFlowDiagram random_diagram(std::mt19937_64& rng, const RandomShape& shape,
                                const std::string& prefix) {
  std::uniform_int_distribution<int> n_stocks(1, shape.max_stocks);
  std::uniform_int_distribution<int> n_flows(0, shape.max_flows);
  std::uniform_int_distribution<int> n_links(0, shape.max_links_per_flow);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  PrimitiveDiagram p;
  std::unordered_map<Id, FlowExpr> fns;
  int ns = n_stocks(rng);
  std::vector<Id> stocks;
  for (int i = 0; i < ns; ++i) {
    stocks.push_back(prefix + "S" + std::to_string(i));
    p.add_stock(stocks.back());
  }
  std::uniform_int_distribution<int> pick_stock(0, ns - 1);
  int nf = n_flows(rng);
  int link_counter = 0;
  for (int i = 0; i < nf; ++i) {
    Id f = prefix + "F" + std::to_string(i);
    p.add_flow(f);
    double r = u(rng);
    bool has_out = true, has_in = true;
    if (r >= shape.p_stock_to_stock) {
      double rest = (r - shape.p_stock_to_stock) / (1.0 - shape.p_stock_to_stock);
      has_out = rest < 0.45;
      has_in = rest >= 0.45 && rest < 0.9;
    }
    if (has_out) p.add_outflow(prefix + "o" + std::to_string(i), f, stocks[pick_stock(rng)]);
    if (has_in) p.add_inflow(prefix + "i" + std::to_string(i), f, stocks[pick_stock(rng)]);
    std::vector<Id> links;
    int nl = n_links(rng);
    for (int k = 0; k < nl; ++k) {
      Id l = prefix + "L" + std::to_string(link_counter++);
      p.add_link(l, f);
      if (u(rng) < 0.8) p.add_ctlink(prefix + "c" + l.substr(prefix.size() + 1), l, stocks[pick_stock(rng)]);
      links.push_back(l);
    }
    fns.emplace(f, random_polynomial(rng, links));
  }
  return make_diagram(std::move(p), std::move(fns));
}

namespace {

using Env = std::unordered_map<Id, double>;
using Fn = std::function<double(const Env&)>;

bool sampled_equal(const std::set<Id>& vars, const Fn& lhs, const Fn& rhs, std::uint64_t seed,
                   int samples, double tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.5, 5.0);
  for (int i = 0; i < samples; ++i) {
    Env env;
    for (const auto& v : vars) env[v] = d(rng);
    double a = lhs(env), b = rhs(env);
    if (std::abs(a - b) > tol * std::max({1.0, std::abs(a), std::abs(b)})) return false;
  }
  return true;
}

double eval(const FlowExpr& e, const Env& env) {
  LinkEnv le;
  for (const auto& v : free_links(e)) le.values[v] = env.at(v);
  return evaluate(e, le);
}

}  // namespace

bool oracle_same_function(const FlowExpr& a, const FlowExpr& b, std::uint64_t seed, int samples,
                          double tol) {
  std::set<Id> vars = free_links(a);
  for (const auto& v : free_links(b)) vars.insert(v);
  return sampled_equal(
      vars, [&](const Env& e) { return eval(a, e); }, [&](const Env& e) { return eval(b, e); },
      seed, samples, tol);
}

bool oracle_valid(const PrimitiveDiagram& d) {
  for (SchemaArrow a : kSchemaArrows) {
    const Carrier& dom = d.carrier(domain(a));
    const Carrier& cod = d.carrier(codomain(a));
    if (d.map(a).size() != dom.size()) return false;
    for (const auto& x : dom) {
      const Id* y = d.map(a).find(x);
      if (!y || !cod.contains(*y)) return false;
    }
  }
  for (SchemaArrow a : {SchemaArrow::In, SchemaArrow::Out, SchemaArrow::Ct}) {
    std::set<Id> seen;
    for (const auto& x : d.carrier(domain(a)))
      if (!seen.insert(d.apply(a, x)).second) return false;
  }
  return true;
}

bool oracle_natural(const DiagramMorphism& F) {
  const PrimitiveDiagram& X = F.source()->prim();
  const PrimitiveDiagram& Y = F.target()->prim();
  for (SchemaObject o : kSchemaObjects)
    for (const auto& x : X.carrier(o)) {
      const Id* y = F.component(o).find(x);
      if (!y || !Y.carrier(o).contains(*y)) return false;
    }
  for (SchemaArrow a : kSchemaArrows)
    for (const auto& x : X.carrier(domain(a)))
      if (Y.apply(a, F(domain(a), x)) != F(codomain(a), X.apply(a, x))) return false;
  return true;
}

bool oracle_flow_condition(const DiagramMorphism& F) {
  const StockFlowDiagram& X = *F.source();
  const StockFlowDiagram& Y = *F.target();
  for (const auto& g : Y.flows()) {
    std::vector<Id> pre;
    for (const auto& f : X.flows())
      if (F(SchemaObject::Flow, f) == g) pre.push_back(f);
    if (pre.empty()) continue;
    std::set<Id> vars;
    for (const auto& l : Y.prim().links_of(g)) vars.insert(l);
    Fn lhs = [&](const Env& env) { return eval(Y.flow_fn(g), env); };
    Fn rhs = [&](const Env& env) {
      double total = 0;
      for (const auto& f : pre) {
        Env local;
        for (const auto& l : X.prim().links_of(f)) local[l] = env.at(F(SchemaObject::Link, l));
        total += eval(X.flow_fn(f), local);
      }
      return total;
    };
    if (!sampled_equal(vars, lhs, rhs, 11, 100, 1e-9)) return false;
  }
  return true;
}

bool oracle_is_iso(const DiagramMorphism& F) {
  const PrimitiveDiagram& X = F.source()->prim();
  const PrimitiveDiagram& Y = F.target()->prim();
  for (SchemaObject o : kSchemaObjects) {
    if (X.carrier(o).size() != Y.carrier(o).size()) return false;
    std::set<Id> image;
    for (const auto& x : X.carrier(o)) {
      const Id* y = F.component(o).find(x);
      if (!y || !Y.carrier(o).contains(*y)) return false;
      image.insert(*y);
    }
    if (image.size() != Y.carrier(o).size()) return false;
  }
  return oracle_natural(F) && oracle_flow_condition(F);
}

std::map<Id, double> oracle_rhs(const StockFlowDiagram& X, const std::map<Id, double>& state) {
  const PrimitiveDiagram& p = X.prim();
  std::map<Id, double> d;
  for (const auto& s : p.stocks()) d[s] = 0.0;
  for (const auto& f : p.flows()) {
    Env env;
    for (const auto& l : p.links_of(f)) {
      auto src = p.link_source(l);
      if (!src) throw std::invalid_argument("oracle_rhs: half link " + l);
      env[l] = state.at(*src);
    }
    double rate = eval(X.flow_fn(f), env);
    for (const auto& i : p.inflows())
      if (p.apply(SchemaArrow::In, i) == f) d[p.apply(SchemaArrow::Down, i)] += rate;
    for (const auto& o : p.outflows())
      if (p.apply(SchemaArrow::Out, o) == f) d[p.apply(SchemaArrow::Up, o)] -= rate;
  }
  return d;
}

namespace {

std::map<Id, double> axpy(const std::map<Id, double>& x, double a, const std::map<Id, double>& y) {
  std::map<Id, double> out = x;
  for (auto& [k, v] : out) v += a * y.at(k);
  return out;
}

}  // namespace

std::vector<std::map<Id, double>> oracle_integrate(const StockFlowDiagram& X,
                                                   std::map<Id, double> init, double t1, long n,
                                                   OracleMethod method) {
  double h = t1 / static_cast<double>(n);
  std::vector<std::map<Id, double>> out{init};
  std::map<Id, double> y = std::move(init);
  for (long i = 0; i < n; ++i) {
    if (method == OracleMethod::Euler) {
      y = axpy(y, h, oracle_rhs(X, y));
    } else {
      auto k1 = oracle_rhs(X, y);
      auto k2 = oracle_rhs(X, axpy(y, h / 2, k1));
      auto k3 = oracle_rhs(X, axpy(y, h / 2, k2));
      auto k4 = oracle_rhs(X, axpy(y, h, k3));
      for (auto& [k, v] : y) v += h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    }
    out.push_back(y);
  }
  return out;
}

DotCounts count_dot(const std::string& dot) {
  DotCounts c;
  std::size_t start = 0;
  while (start < dot.size()) {
    std::size_t end = dot.find('\n', start);
    if (end == std::string::npos) end = dot.size();
    std::string line = dot.substr(start, end - start);
    start = end + 1;
    bool edge = line.find(" -> ") != std::string::npos;
    if (!edge && line.find("shape=box") != std::string::npos) ++c.boxes;
    if (!edge && line.find("shape=circle") != std::string::npos) ++c.midpoints;
    if (!edge && line.find("class=\"cloud\"") != std::string::npos) ++c.clouds;
    if (!edge && line.find("class=\"half-link\"") != std::string::npos) ++c.half_link_points;
    if (edge && line.find("class=\"flow\"") != std::string::npos) ++c.flow_edges;
    if (edge && line.find("class=\"flow-tail\"") != std::string::npos) ++c.flow_tails;
    if (edge && line.find("class=\"link\"") != std::string::npos) ++c.link_edges;
  }
  return c;
}

DotCounts expected_dot(const PrimitiveDiagram& p) {
  DotCounts c;
  c.boxes = static_cast<int>(p.stocks().size());
  c.midpoints = c.flow_edges = c.flow_tails = static_cast<int>(p.flows().size());
  c.link_edges = static_cast<int>(p.links().size());
  c.half_link_points = static_cast<int>(p.links().size() - p.ctlinks().size());
  c.clouds = 2 * static_cast<int>(p.flows().size()) - static_cast<int>(p.inflows().size()) -
             static_cast<int>(p.outflows().size());
  return c;
}

}  // namespace sfd::testing

namespace sfd::testing {

namespace {

// Copy of the part of X spanned by `stocks` and `flows`, ids prefixed.
StockFlowDiagram restrict_prefixed(const StockFlowDiagram& X, const std::set<Id>& stocks,
                                   const std::set<Id>& flows, const std::string& prefix) {
  const PrimitiveDiagram& p = X.prim();
  PrimitiveDiagram q;
  std::unordered_map<Id, FlowExpr> fns;
  std::unordered_map<Id, Id> rename;
  for (const auto& s : p.stocks())
    if (stocks.count(s)) q.add_stock(prefix + s);
  for (const auto& f : p.flows()) {
    if (!flows.count(f)) continue;
    q.add_flow(prefix + f);
    for (const auto& l : p.links_of(f)) {
      q.add_link(prefix + l, prefix + f);
      rename[l] = prefix + l;
      if (auto ct = p.ctlink_of(l); ct && stocks.count(p.apply(SchemaArrow::St, *ct)))
        q.add_ctlink(prefix + *ct, prefix + l, prefix + p.apply(SchemaArrow::St, *ct));
    }
    if (auto i = p.inflow_of(f)) q.add_inflow(prefix + *i, prefix + f, prefix + p.apply(SchemaArrow::Down, *i));
    if (auto o = p.outflow_of(f)) q.add_outflow(prefix + *o, prefix + f, prefix + p.apply(SchemaArrow::Up, *o));
    fns.emplace(prefix + f, precompose(X.flow_fn(f), rename));
  }
  return make_diagram(std::move(q), std::move(fns));
}

// The inclusion of a prefixed restriction back into its origin.
DiagramMorphism strip_prefix(const DiagramPtr& A, const DiagramPtr& X, const std::string& prefix) {
  DiagramMorphism F(A, X);
  for (SchemaObject o : kSchemaObjects)
    for (const auto& x : A->prim().carrier(o)) F.component(o).set(x, x.substr(prefix.size()));
  return F;
}

// Adds `extra` fresh stocks and stock-to-stock flows to a copy of X.
StockFlowDiagram grow(std::mt19937_64& rng, const StockFlowDiagram& X, int extra_stocks,
                      int extra_flows, const std::string& prefix) {
  PrimitiveDiagram q = X.prim();
  std::unordered_map<Id, FlowExpr> fns = X.flow_fns();
  for (int i = 0; i < extra_stocks; ++i) q.add_stock(prefix + "S" + std::to_string(i));
  if (q.stocks().empty()) return make_diagram(std::move(q), std::move(fns));
  std::uniform_int_distribution<std::size_t> pick(0, q.stocks().size() - 1);
  for (int i = 0; i < extra_flows; ++i) {
    Id f = prefix + "F" + std::to_string(i);
    Id l = prefix + "L" + std::to_string(i);
    Id from = q.stocks().ids()[pick(rng)];
    q.add_flow(f).add_outflow(prefix + "o" + std::to_string(i), f, from);
    q.add_inflow(prefix + "i" + std::to_string(i), f, q.stocks().ids()[pick(rng)]);
    q.add_link(l, f).add_ctlink(prefix + "c" + std::to_string(i), l, from);
    fns.emplace(f, random_polynomial(rng, {l}));
  }
  return make_diagram(std::move(q), std::move(fns));
}

}  // namespace

RandomSpan random_span(std::mt19937_64& rng) {
  RandomShape small;
  small.max_stocks = 4;
  small.max_flows = 3;
  small.max_links_per_flow = 1;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> upto2(0, 2);

  if (coin(rng)) {
    auto Z = share(random_diagram(rng, small, "z"));
    auto Y = share(random_diagram(rng, small, "y"));
    std::uniform_int_distribution<int> n(1, 3);
    std::vector<Id> stocks;
    for (int i = 0, k = n(rng); i < k; ++i) stocks.push_back("a" + std::to_string(i));
    auto A = share(disc(stocks));
    DiagramMorphism s1(A, Z), s2(A, Y);
    std::uniform_int_distribution<std::size_t> pz(0, Z->stocks().size() - 1);
    std::uniform_int_distribution<std::size_t> py(0, Y->stocks().size() - 1);
    for (const auto& a : stocks) {
      s1.component(SchemaObject::Stock).set(a, Z->stocks().ids()[pz(rng)]);
      s2.component(SchemaObject::Stock).set(a, Y->stocks().ids()[py(rng)]);
    }
    return {A, Z, Y, s1, s2};
  }

  auto Z = share(random_diagram(rng, small, "z"));
  std::set<Id> flows, stocks;
  for (const auto& f : Z->flows())
    if (coin(rng)) {
      flows.insert(f);
      if (auto s = Z->prim().upstream_stock(f)) stocks.insert(*s);
      if (auto s = Z->prim().downstream_stock(f)) stocks.insert(*s);
    }
  for (const auto& s : Z->stocks())
    if (coin(rng)) stocks.insert(s);
  auto A = share(restrict_prefixed(*Z, stocks, flows, "a"));
  StockFlowDiagram Acopy = restrict_prefixed(*Z, stocks, flows, "y");
  int room_s = 4 - static_cast<int>(Acopy.stocks().size());
  int room_f = 3 - static_cast<int>(Acopy.flows().size());
  auto Y = share(grow(rng, Acopy, std::min(room_s, upto2(rng)), std::max(0, std::min(room_f, upto2(rng))), "y+"));
  // a<id> -> y<id> inside Y, a<id> -> <id> inside Z.
  DiagramMorphism s1 = strip_prefix(A, Z, "a");
  DiagramMorphism s2(A, Y);
  for (SchemaObject o : kSchemaObjects)
    for (const auto& x : A->prim().carrier(o)) s2.component(o).set(x, "y" + x.substr(1));
  return {A, Z, Y, s1, s2};
}

}  // namespace sfd::testing
