#include <doctest.h>

#include "support.hpp"

using namespace sfd;
using testing::build;
using testing::sir;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Format;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const char* kFixtures[] = {"sir.json", "hospital_ward.json", "hospital_golden.json",
                           "updown_upstream.json", "updown_downstream.json"};

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "stockflow-io-test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("fixtures round-trip byte for byte") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    std::string text = testing::read_fixture_text(name);
    StockFlowDiagram X = from_json(text);
    CHECK(to_json(X) == text);
    auto path = scratch(name);
    save(X, path);
    CHECK(read_file(path) == text);
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  }
}

TEST_CASE("loaded SIR equals the hand-built one up to iso") {
  auto X = testing::load_fixture("sir.json");
  auto iso = iso_check(X, share(sir()));
  REQUIRE(iso);
  CHECK(testing::oracle_is_iso(*iso));
}

TEST_CASE("random diagrams survive serialization") {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 50; ++i) {
    StockFlowDiagram X = testing::random_diagram(rng);
    std::string text = to_json(X);
    StockFlowDiagram Y = from_json(text);
    CHECK(to_json(Y) == text);
    for (const auto& f : X.flows()) CHECK(Y.flow_fn(f) == X.flow_fn(f));
    auto iso = iso_check(share(X), share(Y));
    REQUIRE(iso);
    CHECK(testing::oracle_is_iso(*iso));
  }
}

TEST_CASE("semantic errors") {
  std::string two_inflows = R"({"stocks":["A","B"],"flows":[{"id":"f","fn":"1"}],
    "inflows":[{"flow":"f","to":"A"},{"flow":"f","to":"B"}],"outflows":[],"links":[]})";
  CHECK(kind_of([&] { from_json(two_inflows); }) == ErrorKind::InvalidDiagram);
  CHECK(message_of([&] { from_json(two_inflows); }).find("in") != std::string::npos);

  std::string bad_source = R"({"stocks":["A"],"flows":[{"id":"f","fn":"l"}],
    "inflows":[],"outflows":[],"links":[{"id":"l","flow":"f","source":"B"}]})";
  CHECK(kind_of([&] { from_json(bad_source); }) == ErrorKind::InvalidDiagram);

  std::string foreign = R"({"stocks":[],"flows":[{"id":"f","fn":"l"},{"id":"g","fn":"1"}],
    "inflows":[],"outflows":[],"links":[{"id":"l","flow":"g","source":null}]})";
  CHECK(kind_of([&] { from_json(foreign); }) == ErrorKind::ForeignLink);
}

TEST_CASE("format errors") {
  CHECK(kind_of([] { from_json("{"); }) == ErrorKind::Format);
  CHECK(kind_of([] { from_json("[]"); }) == ErrorKind::Format);
  std::string extra = R"({"stocks":[],"flows":[],"inflows":[],"outflows":[],"links":[],"colour":"red"})";
  CHECK(kind_of([&] { from_json(extra); }) == ErrorKind::Format);
  std::string missing = R"({"stocks":[],"flows":[],"inflows":[],"outflows":[]})";
  CHECK(kind_of([&] { from_json(missing); }) == ErrorKind::Format);
  std::string wrong_type = R"({"stocks":[1],"flows":[],"inflows":[],"outflows":[],"links":[]})";
  CHECK(message_of([&] { from_json(wrong_type); }).find("/stocks/0") != std::string::npos);
  std::string bad_fn = R"({"stocks":[],"flows":[{"id":"f","fn":"1 +"}],"inflows":[],"outflows":[],"links":[]})";
  CHECK(kind_of([&] { from_json(bad_fn); }) == ErrorKind::Syntax);
  CHECK(kind_of([] { load("/nonexistent/dir/file.json"); }) == ErrorKind::Io);
}

TEST_CASE("DOT export counts match the carriers") {
  std::string dot = export_dot(sir());
  testing::DotCounts c = testing::count_dot(dot);
  CHECK(c.boxes == 3);
  CHECK(c.flow_edges == 2);
  CHECK(c.link_edges == 3);
  CHECK(c.clouds == 0);

  auto half = build({"S", "I"}, {{"Infection", "0.3 * l1", "S", "I"}, {"Recovery", "0.1 * l3", "I", {}}},
                    {{"l1", "Infection", "S"}, {"l3", "Recovery", "I"}});
  CHECK(testing::count_dot(export_dot(half)).clouds == 1);

  std::string empty = export_dot(make_diagram(PrimitiveDiagram{}, {}));
  CHECK(empty.rfind("digraph", 0) == 0);
  CHECK(empty.find('}') != std::string::npos);
  testing::DotCounts e = testing::count_dot(empty);
  CHECK(e.boxes + e.midpoints + e.clouds + e.flow_edges + e.link_edges == 0);

  std::mt19937_64 rng(45);
  for (int i = 0; i < 30; ++i) {
    StockFlowDiagram X = testing::random_diagram(rng);
    testing::DotCounts got = testing::count_dot(export_dot(X));
    testing::DotCounts want = testing::expected_dot(X.prim());
    CHECK(got.boxes == want.boxes);
    CHECK(got.midpoints == want.midpoints);
    CHECK(got.clouds == want.clouds);
    CHECK(got.flow_edges == want.flow_edges);
    CHECK(got.flow_tails == want.flow_tails);
    CHECK(got.link_edges == want.link_edges);
    CHECK(got.half_link_points == want.half_link_points);
  }
}

TEST_CASE("DOT quotes awkward ids") {
  auto X = build({"a \"b\""}, {}, {});
  std::string dot = export_dot(X);
  CHECK(dot.find("\"stock:a \\\"b\\\"\"") != std::string::npos);
}

TEST_CASE("morphism files") {
  auto X = share(disc({"*"}));
  std::string text = R"({"diagram": )" + to_json(sir()) + R"(, "map": {"Stock": {"*": "R"}}})";
  DiagramMorphism F = morphism_from_json(text, X);
  CHECK(F(SchemaObject::Stock, "*") == "R");
  CHECK(check_naturality(F).ok());

  auto U = share(build({}, {{"Recovery", "0.1 * l3", {}, {}}}, {{"l3", "Recovery", {}}}));
  std::string leg = R"({"diagram": )" + to_json(sir()) +
                    R"(, "map": {"Flow": {"Recovery": "Recovery"}, "Link": {"l3": "l3"}}})";
  DiagramMorphism G = morphism_from_json(leg, U);
  CHECK(check_flow_condition(G, EqCheckConfig{}).ok());

  std::string bad = R"({"diagram": )" + to_json(sir()) + R"(, "map": {"Stock": {"*": "Nope"}}})";
  CHECK_FALSE(check_naturality(morphism_from_json(bad, X)).ok());
  std::string unknown = R"({"diagram": )" + to_json(sir()) + R"(, "map": {"Stocks": {}}})";
  CHECK(kind_of([&] { morphism_from_json(unknown, X); }) == ErrorKind::Format);
}
