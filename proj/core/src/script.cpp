#include "stockflow/script.hpp"

#include "json_io.hpp"
#include "stockflow/error.hpp"
#include "stockflow/io.hpp"

namespace sfd {

namespace {

using detail::as_string;
using detail::expect_array;
using detail::expect_object;
using detail::format_error;
using detail::get_string;
using detail::json;
using detail::parse_fn;

std::vector<Id> string_list(const json& j, const std::string& ptr) {
  expect_array(j, ptr);
  std::vector<Id> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], ptr + "/" + std::to_string(i)));
  return out;
}

std::map<Id, Id> string_map(const json& j, const std::string& ptr) {
  if (!j.is_object()) format_error(ptr, "expected an object");
  std::map<Id, Id> out;
  for (const auto& [k, v] : j.items()) out.emplace(k, as_string(v, ptr + "/" + k));
  return out;
}

DiagramPtr diagram_ref(const json& j, const std::string& ptr, const std::filesystem::path& base) {
  if (j.is_string()) {
    std::filesystem::path p(j.get<std::string>());
    return share(load(p.is_absolute() ? p : base / p));
  }
  return share(detail::diagram_from_json(j, ptr));
}

ScriptStep parse_step(const json& j, const std::string& p, const std::filesystem::path& base) {
  if (!j.is_object() || !j.contains("op")) format_error(p, "expected an object with \"op\"");
  std::string op = get_string(j, "op", p);
  if (op == "split") {
    expect_object(j, p, {"op", "flow", "parts"});
    SplitSpec spec{get_string(j, "flow", p), {}};
    const json& parts = expect_array(j.at("parts"), p + "/parts");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::string pp = p + "/parts/" + std::to_string(i);
      expect_object(parts[i], pp, {"id", "fn"});
      spec.parts.push_back({get_string(parts[i], "id", pp), parse_fn(get_string(parts[i], "fn", pp), pp + "/fn")});
    }
    return spec;
  }
  if (op == "substitute") {
    expect_object(j, p, {"op", "stock", "with", "attach"});
    const json& a = j.at("attach");
    expect_object(a, p + "/attach", {}, {"up", "down", "st"});
    AttachmentSpec spec;
    if (a.contains("up")) spec.up = string_map(a.at("up"), p + "/attach/up");
    if (a.contains("down")) spec.down = string_map(a.at("down"), p + "/attach/down");
    if (a.contains("st")) spec.st = string_map(a.at("st"), p + "/attach/st");
    return Substitution{get_string(j, "stock", p), diagram_ref(j.at("with"), p + "/with", base), spec};
  }
  if (op == "updown") {
    expect_object(j, p, {"op", "other", "a", "b", "flow"}, {"update"});
    UpdownStep step{diagram_ref(j.at("other"), p + "/other", base),
                    {get_string(j, "a", p), get_string(j, "b", p), get_string(j, "flow", p)},
                    std::nullopt};
    if (j.contains("update")) {
      const json& u = j.at("update");
      expect_object(u, p + "/update", {"links", "fn"});
      step.update = FlowUpdate{step.triple.a, step.triple.f, string_list(u.at("links"), p + "/update/links"),
                               parse_fn(get_string(u, "fn", p + "/update"), p + "/update/fn")};
    }
    return step;
  }
  if (op == "update") {
    expect_object(j, p, {"op", "stock", "flow", "links", "fn"});
    return FlowUpdate{get_string(j, "stock", p), get_string(j, "flow", p),
                      string_list(j.at("links"), p + "/links"), parse_fn(get_string(j, "fn", p), p + "/fn")};
  }
  if (op == "add_flow") {
    expect_object(j, p, {"op", "stock", "side", "flow", "fn"}, {"links"});
    std::string side = get_string(j, "side", p);
    if (side != "in" && side != "out") format_error(p + "/side", "expected \"in\" or \"out\"");
    AddFlowStep step{get_string(j, "stock", p), side == "in" ? FlowSide::In : FlowSide::Out,
                     get_string(j, "flow", p), {}, parse_fn(get_string(j, "fn", p), p + "/fn")};
    if (j.contains("links")) {
      const json& links = expect_array(j.at("links"), p + "/links");
      for (std::size_t i = 0; i < links.size(); ++i) {
        std::string lp = p + "/links/" + std::to_string(i);
        expect_object(links[i], lp, {"id"}, {"source"});
        NewLink nl{get_string(links[i], "id", lp), std::nullopt};
        if (links[i].contains("source") && !links[i].at("source").is_null())
          nl.source = as_string(links[i].at("source"), lp + "/source");
        step.links.push_back(std::move(nl));
      }
    }
    return step;
  }
  format_error(p + "/op", "unknown op \"" + op + "\"");
}

}  // namespace

std::vector<ScriptStep> parse_script(std::string_view text, const std::filesystem::path& base_dir) {
  json j = detail::parse_json(text);
  expect_array(j, "");
  std::vector<ScriptStep> steps;
  for (std::size_t i = 0; i < j.size(); ++i) steps.push_back(parse_step(j[i], "/" + std::to_string(i), base_dir));
  return steps;
}

std::vector<ScriptStep> load_script(const std::filesystem::path& path) {
  try {
    return parse_script(read_file(path), path.parent_path());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

StockFlowDiagram run_script(const StockFlowDiagram& X, const std::vector<ScriptStep>& steps,
                            const SubstitutionOptions& opts) {
  StockFlowDiagram current = X;
  for (std::size_t k = 0; k < steps.size();) {
    std::size_t first = k;
    try {
      if (std::holds_alternative<Substitution>(steps[k])) {
        SubstitutionPlan plan;
        while (k < steps.size() && std::holds_alternative<Substitution>(steps[k]))
          plan.substitutions.push_back(std::get<Substitution>(steps[k++]));
        current = hierarchical_expand(current, plan, opts);
        continue;
      }
      const ScriptStep& s = steps[k++];
      if (const auto* split = std::get_if<SplitSpec>(&s)) {
        current = split_flow(current, *split, opts.eq);
      } else if (const auto* ud = std::get_if<UpdownStep>(&s)) {
        current = *compose_updown(current, *ud->other, ud->triple, ud->update, opts.eq).composite;
      } else if (const auto* up = std::get_if<FlowUpdate>(&s)) {
        current = update_flow(current, *up, opts.eq);
      } else if (const auto* add = std::get_if<AddFlowStep>(&s)) {
        current = add_flow(current, add->stock, add->side, add->flow, add->links, add->fn, opts.eq);
      }
    } catch (const Error& e) {
      throw e.at_step(first + 1);
    }
  }
  return current;
}

}  // namespace sfd
