#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "stockflow/stockflow.hpp"

namespace sfd::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  double tol = 1e-9;
  int samples = 100;
  std::uint64_t seed = 42;
  bool allow_open = false;
  std::string out;

  EqCheckConfig eq() const {
    EqCheckConfig cfg;
    cfg.tol = tol;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }

  SubstitutionOptions substitution() const { return SubstitutionOptions{eq(), allow_open}; }
};

class Runner {
 public:
  Runner(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

  void emit_text(const std::string& text) {
    if (g_.out.empty())
      out_ << text;
    else
      write_file_atomic(g_.out, text);
  }

  void emit(const StockFlowDiagram& X) { emit_text(to_json(X)); }

  int validate(const std::string& file) {
    StockFlowDiagram X = load(file);
    HalfFlows h = half_flows(X.prim());
    out_ << "ok: " << X.stocks().size() << " stocks, " << X.flows().size() << " flows, "
         << X.links().size() << " links\n";
    auto list = [&](const char* label, const std::set<Id>& ids) {
      out_ << label << ':';
      for (const auto& id : ids) out_ << ' ' << id;
      out_ << '\n';
    };
    list("half inflows", h.inflow_only);
    list("half outflows", h.outflow_only);
    out_ << "closed: " << (is_closed(X.prim()) ? "yes" : "no") << '\n';
    return 0;
  }

  int decompose(const std::string& file, const std::string& out_dir) {
    StockFlowDiagram X = load(file);
    ElDiagram el = elements_category(X);
    fs::create_directories(out_dir);
    json index = {{"objects", json::array()}, {"arrows", json::array()}};
    for (std::size_t k = 0; k < el.objects.size(); ++k) {
      std::string name = "object" + std::to_string(k) + ".json";
      save(*el.objects[k].diagram, fs::path(out_dir) / name);
      index["objects"].push_back({{"name", el.objects[k].name}, {"file", name}});
    }
    for (const auto& arr : el.arrows) {
      json map = json::object();
      for (SchemaObject o : {SchemaObject::Stock, SchemaObject::Flow, SchemaObject::Link}) {
        json comp = json::object();
        for (const auto& x : arr.map.source()->prim().carrier(o)) comp[x] = arr.map(o, x);
        map[std::string(to_string(o))] = std::move(comp);
      }
      index["arrows"].push_back({{"source", arr.source}, {"target", arr.target}, {"map", map}});
    }
    write_file_atomic(fs::path(out_dir) / "index.json", index.dump(2) + "\n");
    err_ << "wrote " << el.objects.size() << " objects and " << el.arrows.size()
         << " arrows to " << out_dir << '\n';
    return 0;
  }

  int recompose(const std::string& dir) {
    json index;
    try {
      index = json::parse(read_file(fs::path(dir) / "index.json"));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, "index.json: " + std::string(e.what()));
    }
    ElDiagram el;
    try {
      for (const auto& obj : index.at("objects"))
        el.add_object(obj.at("name").get<std::string>(),
                      share(load(fs::path(dir) / obj.at("file").get<std::string>())));
      for (const auto& arr : index.at("arrows")) {
        auto s = arr.at("source").get<std::size_t>();
        auto t = arr.at("target").get<std::size_t>();
        if (s >= el.objects.size() || t >= el.objects.size())
          throw Error(ErrorKind::Format, "index.json: arrow endpoint out of range");
        DiagramMorphism F(el.objects[s].diagram, el.objects[t].diagram);
        for (const auto& [key, comp] : arr.at("map").items()) {
          SchemaObject o = object_named(key);
          for (const auto& [x, y] : comp.items()) F.component(o).set(x, y.get<std::string>());
        }
        F.induce_incidences();
        el.add_arrow(s, t, std::move(F));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, "index.json: " + std::string(e.what()));
    }
    emit(recompose_el(el));
    return 0;
  }

  int pushout(const std::string& apex_file, const std::string& z_file, const std::string& y_file) {
    DiagramPtr apex = share(load(apex_file));
    DiagramMorphism s1 = load_morphism(z_file, apex);
    DiagramMorphism s2 = load_morphism(y_file, apex);
    PushoutResult r = presheaf_pushout(SpanOfDiagrams{apex, s1, s2}, g_.eq());
    emit(*r.apex);
    return 0;
  }

  int split(const std::string& file, const std::string& flow, const std::string& parts_text) {
    StockFlowDiagram X = load(file);
    SplitSpec spec{flow, {}};
    json parts;
    try {
      parts = json::parse(parts_text);
      for (const auto& p : parts)
        spec.parts.push_back({p.at("id").get<std::string>(), parse(p.at("fn").get<std::string>())});
    } catch (const json::exception&) {
      throw UsageError("--parts must be a JSON array of {\"id\": ..., \"fn\": ...}");
    }
    emit(split_flow(X, spec, g_.eq()));
    return 0;
  }

  int script(const std::string& file, const std::string& script_file, bool substitutions_only) {
    StockFlowDiagram X = load(file);
    std::vector<ScriptStep> steps = load_script(script_file);
    if (substitutions_only)
      for (std::size_t k = 0; k < steps.size(); ++k)
        if (!std::holds_alternative<Substitution>(steps[k]))
          throw Error(ErrorKind::Format, "step " + std::to_string(k + 1) +
                                             ": only substitute steps are allowed here");
    emit(run_script(X, steps, g_.substitution()));
    return 0;
  }

  int updown(const std::string& x_file, const std::string& y_file, const UpDownTriple& T) {
    StockFlowDiagram X = load(x_file);
    StockFlowDiagram Y = load(y_file);
    emit(*compose_updown(X, Y, T, std::nullopt, g_.eq()).composite);
    return 0;
  }

  int simulate_cmd(const std::string& file, SimConfig cfg, const std::string& init,
                   const std::vector<std::string>& exo, const std::string& csv_out) {
    StockFlowDiagram X = load(file);
    for (const auto& [k, v] : split_pairs(init, ',')) cfg.init[k] = parse_number(v, k);
    for (const auto& item : exo) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--exo expects link=expression, got '" + item + "'");
      cfg.exogenous.insert_or_assign(item.substr(0, eq), parse(item.substr(eq + 1)));
    }
    Trajectory traj = simulate(X, cfg);
    std::ostringstream os;
    write_csv(os, traj);
    if (csv_out.empty())
      out_ << os.str();
    else
      write_file_atomic(csv_out, os.str());
    return 0;
  }

  int export_dot_cmd(const std::string& file) {
    emit_text(export_dot(load(file)));
    return 0;
  }

 private:
  static SchemaObject object_named(const std::string& key) {
    for (SchemaObject o : kSchemaObjects)
      if (to_string(o) == key) return o;
    throw Error(ErrorKind::Format, "index.json: unknown schema object '" + key + "'");
  }

  StockFlowDiagram recompose_el(const ElDiagram& el) { return sfd::recompose(el, g_.eq()); }

  static std::vector<std::pair<std::string, std::string>> split_pairs(const std::string& text,
                                                                      char sep) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("expected name=value, got '" + item + "'");
      out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
  }

  static double parse_number(const std::string& text, const std::string& what) {
    double v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw UsageError("value for '" + what + "' is not a number: '" + text + "'");
    return v;
  }

  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compose, decompose and simulate stock & flow diagrams", "sfc"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--tol", g.tol, "Relative tolerance for flow function equality")->capture_default_str();
  app.add_option("--samples", g.samples, "Sample points for flow function equality")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for the sample points")->capture_default_str();
  app.add_flag("--allow-open", g.allow_open, "Accept open substituting diagrams");
  app.add_option("--out", g.out, "Write the result here instead of stdout");

  std::string file, file2, file3, out_dir, flow, parts, script, a, b, init, csv_out, method = "rk4";
  std::vector<std::string> exo;
  SimConfig sim;

  auto* validate = app.add_subcommand("validate", "Check a diagram file");
  validate->add_option("file", file)->required();

  auto* decompose = app.add_subcommand("decompose", "Write corollas, unit flows and arrows");
  decompose->add_option("file", file)->required();
  decompose->add_option("--out-dir", out_dir)->required();

  auto* recompose = app.add_subcommand("recompose", "Colimit of a decomposition directory");
  recompose->add_option("dir", file)->required();

  auto* pushout = app.add_subcommand("pushout", "Pushout of two legs out of an apex diagram");
  pushout->add_option("apex", file)->required();
  pushout->add_option("legZ", file2)->required();
  pushout->add_option("legY", file3)->required();

  auto* split = app.add_subcommand("split", "Split a flow into parts");
  split->add_option("file", file)->required();
  split->add_option("--flow", flow)->required();
  split->add_option("--parts", parts, "JSON array of {\"id\", \"fn\"}")->required();

  auto* substitute = app.add_subcommand("substitute", "Run a script of substitute steps");
  substitute->add_option("file", file)->required();
  substitute->add_option("--script", script)->required();

  auto* updown = app.add_subcommand("updown", "Dock a half outflow of X onto a stock of Y");
  updown->add_option("X", file)->required();
  updown->add_option("Y", file2)->required();
  updown->add_option("--a", a)->required();
  updown->add_option("--b", b)->required();
  updown->add_option("--flow", flow)->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run a composition script");
  pipeline->add_option("file", file)->required();
  pipeline->add_option("--script", script)->required();

  auto* simulate = app.add_subcommand("simulate", "Integrate the diagram's dynamics");
  simulate->add_option("file", file)->required();
  simulate->add_option("--t0", sim.t0)->capture_default_str();
  simulate->add_option("--t1", sim.t1)->capture_default_str();
  simulate->add_option("--dt", sim.dt)->capture_default_str();
  simulate->add_option("--method", method)->check(CLI::IsMember({"euler", "rk4"}))->capture_default_str();
  simulate->add_option("--init", init, "Initial values, e.g. S=990,I=10,R=0")->required();
  simulate->add_option("--exo", exo, "Half link input over t, e.g. l1=5*exp(-t)");
  simulate->add_option("--csv-out", csv_out);
  simulate->add_flag("--clamp-nonnegative", sim.clamp_nonnegative);

  auto* dot = app.add_subcommand("export-dot", "Render a diagram as Graphviz DOT");
  dot->add_option("file", file)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Runner run(g, out, err);
  try {
    if (validate->parsed()) return run.validate(file);
    if (decompose->parsed()) return run.decompose(file, out_dir);
    if (recompose->parsed()) return run.recompose(file);
    if (pushout->parsed()) return run.pushout(file, file2, file3);
    if (split->parsed()) return run.split(file, flow, parts);
    if (substitute->parsed()) return run.script(file, script, true);
    if (pipeline->parsed()) return run.script(file, script, false);
    if (updown->parsed()) return run.updown(file, file2, UpDownTriple{a, b, flow});
    if (simulate->parsed()) {
      sim.method = method == "euler" ? Method::Euler : Method::Rk4;
      return run.simulate_cmd(file, sim, init, exo, csv_out);
    }
    if (dot->parsed()) return run.export_dot_cmd(file);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [Io]: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace sfd::cli
