#include "stockflow/io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "json_io.hpp"
#include "stockflow/error.hpp"

namespace sfd {

namespace detail {

void format_error(const std::string& ptr, const std::string& message) {
  throw Error(ErrorKind::Format, (ptr.empty() ? std::string("/") : ptr) + ": " + message);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Format, "malformed JSON at byte " + std::to_string(e.byte));
  }
}

void expect_object(const json& j, const std::string& ptr,
                   std::initializer_list<const char*> required,
                   std::initializer_list<const char*> optional) {
  if (!j.is_object()) format_error(ptr, "expected an object");
  std::set<std::string> known;
  for (const char* k : required) {
    known.insert(k);
    if (!j.contains(k)) format_error(ptr, std::string("missing key \"") + k + "\"");
  }
  for (const char* k : optional) known.insert(k);
  for (const auto& [k, v] : j.items())
    if (known.count(k) == 0) format_error(ptr, "unknown key \"" + k + "\"");
}

const json& expect_array(const json& j, const std::string& ptr) {
  if (!j.is_array()) format_error(ptr, "expected an array");
  return j;
}

std::string as_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) format_error(ptr, "expected a string");
  return j.get<std::string>();
}

std::string get_string(const json& j, const char* key, const std::string& ptr) {
  return as_string(j.at(key), ptr + "/" + key);
}

FlowExpr parse_fn(const std::string& src, const std::string& ptr) {
  try {
    return parse(src);
  } catch (const SyntaxError& e) {
    throw e.with_context(ptr);
  }
}

StockFlowDiagram diagram_from_json(const json& j, const std::string& ptr) {
  expect_object(j, ptr, {"stocks", "flows", "inflows", "outflows", "links"});
  PrimitiveDiagram prim;
  std::unordered_map<Id, FlowExpr> fns;
  auto with_ptr = [](const std::string& p, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Format) throw;
      throw e.with_context(p);
    }
  };

  const json& stocks = expect_array(j.at("stocks"), ptr + "/stocks");
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    std::string p = ptr + "/stocks/" + std::to_string(i);
    with_ptr(p, [&] { prim.add_stock(as_string(stocks[i], p)); });
  }

  const json& flows = expect_array(j.at("flows"), ptr + "/flows");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    std::string p = ptr + "/flows/" + std::to_string(i);
    expect_object(flows[i], p, {"id", "fn"});
    Id id = get_string(flows[i], "id", p);
    FlowExpr fn = parse_fn(get_string(flows[i], "fn", p), p + "/fn");
    with_ptr(p, [&] { prim.add_flow(id); });
    fns.emplace(id, std::move(fn));
  }

  // A repeated flow gets a fresh incidence id so validation reports the
  // injectivity failure rather than an id clash.
  auto incidences = [&](const char* key, const char* stock_key, bool inflow) {
    const json& arr = expect_array(j.at(key), ptr + "/" + key);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string p = ptr + "/" + key + "/" + std::to_string(i);
      expect_object(arr[i], p, {"flow", stock_key});
      Id flow = get_string(arr[i], "flow", p);
      Id stock = get_string(arr[i], stock_key, p);
      SchemaObject o = inflow ? SchemaObject::Inflow : SchemaObject::Outflow;
      Id inc = flow;
      for (int k = 2; prim.carrier(o).contains(inc); ++k) inc = flow + "#" + std::to_string(k);
      if (inflow)
        prim.add_inflow(inc, flow, stock);
      else
        prim.add_outflow(inc, flow, stock);
    }
  };
  incidences("inflows", "to", true);
  incidences("outflows", "from", false);

  const json& links = expect_array(j.at("links"), ptr + "/links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    std::string p = ptr + "/links/" + std::to_string(i);
    expect_object(links[i], p, {"id", "flow", "source"});
    Id id = get_string(links[i], "id", p);
    Id flow = get_string(links[i], "flow", p);
    const json& src = links[i].at("source");
    if (!src.is_null() && !src.is_string()) format_error(p + "/source", "expected a string or null");
    with_ptr(p, [&] {
      prim.add_link(id, flow);
      if (src.is_string()) prim.add_ctlink(id, id, src.get<std::string>());
    });
  }
  return make_diagram(std::move(prim), std::move(fns));
}

json diagram_to_json(const StockFlowDiagram& X) {
  const PrimitiveDiagram& p = X.prim();
  json j = json::object();
  j["stocks"] = X.stocks().ids();
  json flows = json::array();
  for (const auto& f : X.flows()) flows.push_back({{"id", f}, {"fn", to_string(X.flow_fn(f))}});
  j["flows"] = std::move(flows);
  json inflows = json::array();
  for (const auto& i : p.inflows())
    inflows.push_back({{"flow", p.apply(SchemaArrow::In, i)}, {"to", p.apply(SchemaArrow::Down, i)}});
  j["inflows"] = std::move(inflows);
  json outflows = json::array();
  for (const auto& o : p.outflows())
    outflows.push_back(
        {{"flow", p.apply(SchemaArrow::Out, o)}, {"from", p.apply(SchemaArrow::Up, o)}});
  j["outflows"] = std::move(outflows);
  json links = json::array();
  for (const auto& l : p.links()) {
    auto src = p.link_source(l);
    links.push_back({{"id", l},
                     {"flow", p.apply(SchemaArrow::Fl, l)},
                     {"source", src ? json(*src) : json(nullptr)}});
  }
  j["links"] = std::move(links);
  return j;
}

}  // namespace detail

std::string to_json(const StockFlowDiagram& X) { return detail::diagram_to_json(X).dump(2) + "\n"; }

StockFlowDiagram from_json(std::string_view text, const std::string& origin) {
  try {
    return detail::diagram_from_json(detail::parse_json(text), "");
  } catch (const Error& e) {
    throw e.with_context(origin);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot replace '" + path.string() + "'");
  }
}

StockFlowDiagram load(const std::filesystem::path& path) {
  return from_json(read_file(path), path.string());
}

void save(const StockFlowDiagram& X, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(X));
}

DiagramMorphism morphism_from_json(std::string_view text, const DiagramPtr& source,
                                   const std::string& origin) {
  using namespace detail;
  try {
    json j = parse_json(text);
    expect_object(j, "", {"diagram", "map"});
    DiagramPtr target = share(diagram_from_json(j.at("diagram"), "/diagram"));
    const json& m = j.at("map");
    expect_object(m, "/map", {}, {"Stock", "Flow", "Inflow", "Outflow", "Link", "CTLink"});
    DiagramMorphism F(source, target);
    bool explicit_incidences = false;
    for (SchemaObject o : kSchemaObjects) {
      std::string key(to_string(o));
      if (!m.contains(key)) continue;
      if (o == SchemaObject::Inflow || o == SchemaObject::Outflow || o == SchemaObject::CTLink)
        explicit_incidences = true;
      std::string p = "/map/" + key;
      if (!m.at(key).is_object()) format_error(p, "expected an object");
      for (const auto& [x, y] : m.at(key).items()) F.component(o).set(x, as_string(y, p + "/" + x));
    }
    if (!explicit_incidences) F.induce_incidences();
    return F;
  } catch (const Error& e) {
    throw e.with_context(origin);
  }
}

DiagramMorphism load_morphism(const std::filesystem::path& path, const DiagramPtr& source) {
  return morphism_from_json(read_file(path), source, path.string());
}

namespace {

std::string dot_id(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string export_dot(const StockFlowDiagram& X) {
  const PrimitiveDiagram& p = X.prim();
  std::ostringstream os;
  os << "digraph stockflow {\n  rankdir=LR;\n";
  for (const auto& s : X.stocks())
    os << "  " << dot_id("stock:" + s) << " [shape=box, label=" << dot_id(s) << "];\n";
  for (const auto& f : X.flows()) {
    std::string mid = dot_id("flow:" + f);
    os << "  " << mid << " [shape=circle, width=0.15, fixedsize=true, label=\"\", xlabel="
       << dot_id(f) << "];\n";
    auto up = p.upstream_stock(f);
    auto down = p.downstream_stock(f);
    std::string from = up ? dot_id("stock:" + *up) : dot_id("cloud:" + f + ":source");
    std::string to = down ? dot_id("stock:" + *down) : dot_id("cloud:" + f + ":sink");
    if (!up) os << "  " << from << " [shape=ellipse, style=dashed, label=\"\", class=\"cloud\"];\n";
    if (!down) os << "  " << to << " [shape=ellipse, style=dashed, label=\"\", class=\"cloud\"];\n";
    os << "  " << from << " -> " << mid
       << " [style=bold, penwidth=3, arrowhead=none, class=\"flow-tail\"];\n";
    os << "  " << mid << " -> " << to << " [style=bold, penwidth=3, class=\"flow\"];\n";
  }
  for (const auto& l : X.links()) {
    auto src = p.link_source(l);
    std::string from;
    if (src) {
      from = dot_id("stock:" + *src);
    } else {
      from = dot_id("linksource:" + l);
      os << "  " << from << " [shape=point, class=\"half-link\"];\n";
    }
    os << "  " << from << " -> " << dot_id("flow:" + p.apply(SchemaArrow::Fl, l))
       << " [penwidth=0.7, color=\"#555555\", label=" << dot_id(l) << ", class=\"link\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace sfd
