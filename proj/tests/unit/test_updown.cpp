#include <doctest.h>

#include "support.hpp"

using namespace sfd;
using testing::build;
using testing::sir;

namespace {

DiagramPtr upstream() { return testing::load_fixture("updown_upstream.json"); }
DiagramPtr downstream() { return testing::load_fixture("updown_downstream.json"); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Format;
}

}  // namespace

TEST_CASE("receiver stubs") {
  ReceiverStub r = receiver_stub(*upstream(), "Recovery");
  const PrimitiveDiagram& p = r.diagram->prim();
  CHECK(p.stocks().size() == 1);
  CHECK(p.flows().size() == 1);
  CHECK(p.links().size() == 1);
  CHECK(p.inflows().size() == 1);
  CHECK(p.outflows().empty());
  CHECK(p.ctlinks().empty());
  CHECK(p.downstream_stock("Recovery") == std::optional<Id>(r.stock));

  auto bare = build({"A"}, {{"drain", "2", "A", {}}}, {});
  CHECK(receiver_stub(bare, "drain").diagram->links().empty());
  CHECK(kind_of([] { receiver_stub(*upstream(), "Nope"); }) == ErrorKind::UnknownFlow);
}

TEST_CASE("docking the upstream chain onto Q") {
  UpDownResult r = compose_updown(*upstream(), *downstream(), {"I", "Q", "Recovery"});
  const PrimitiveDiagram& p = r.composite->prim();
  CHECK(p.stocks().size() == upstream()->stocks().size() + downstream()->stocks().size());
  CHECK(p.upstream_stock("Recovery") == std::optional<Id>("I"));
  CHECK(p.downstream_stock("Recovery") == std::optional<Id>("Q"));
  CHECK(half_flows(p).outflow_only.empty());
  CHECK(is_closed(p));
  CHECK(testing::oracle_valid(p));
  for (const DiagramMorphism* leg : {&r.from_x, &r.from_stub, &r.from_y}) {
    CHECK(testing::oracle_natural(*leg));
    CHECK(testing::oracle_flow_condition(*leg));
    CHECK(check_flow_condition(*leg, EqCheckConfig{}).ok());
  }
  CHECK(testing::oracle_same_function(r.composite->flow_fn("Recovery"), parse("0.1 * l3")));
}

TEST_CASE("docking onto a single stock caps the half flow") {
  UpDownResult r = compose_updown(*upstream(), disc({"Sink"}), {"I", "Sink", "Recovery"});
  auto capped = build({"S", "I", "Sink"},
                      {{"Infection", "0.3 * l1 * l2", "S", "I"}, {"Recovery", "0.1 * l3", "I", "Sink"}},
                      {{"l1", "Infection", "S"}, {"l2", "Infection", "I"}, {"l3", "Recovery", "I"}});
  auto iso = iso_check(r.composite, share(capped));
  REQUIRE(iso);
  CHECK(testing::oracle_is_iso(*iso));
}

TEST_CASE("validation of the triple") {
  CHECK(kind_of([] { compose_updown(sir(), *downstream(), {"I", "Q", "Recovery"}); }) ==
        ErrorKind::NotHalfOutflow);
  CHECK(kind_of([] { compose_updown(*upstream(), *downstream(), {"S", "Q", "Recovery"}); }) ==
        ErrorKind::NotHalfOutflow);
  CHECK(kind_of([] { compose_updown(*upstream(), *downstream(), {"I", "Nope", "Recovery"}); }) ==
        ErrorKind::UnknownStock);
  CHECK(kind_of([] { compose_updown(*upstream(), *downstream(), {"I", "Q", "Nope"}); }) ==
        ErrorKind::UnknownFlow);
}

TEST_CASE("id clashes between X and Y are freshened on the Y side") {
  auto Y = build({"I", "V"}, {{"Infection", "0.2 * k", "I", "V"}}, {{"k", "Infection", "I"}});
  UpDownResult r = compose_updown(*upstream(), Y, {"I", "I", "Recovery"});
  CHECK(r.composite->stocks().size() == 4);
  CHECK(r.composite->flows().size() == 3);
  CHECK(r.composite->prim().downstream_stock("Recovery") != std::optional<Id>("I"));
  CHECK(testing::oracle_valid(r.composite->prim()));
}

TEST_CASE("optional link update after docking") {
  FlowUpdate u{"I", "Recovery", {"l3"}, parse("0.2 * l3")};
  UpDownResult r = compose_updown(*upstream(), *downstream(), {"I", "Q", "Recovery"}, u);
  CHECK(testing::oracle_same_function(r.composite->flow_fn("Recovery"), parse("0.2 * l3")));
  CHECK(testing::oracle_same_function(r.glued->flow_fn("Recovery"), parse("0.1 * l3")));
}

TEST_CASE("mass moves from a to b") {
  UpDownResult r = compose_updown(*upstream(), *downstream(), {"I", "Q", "Recovery"});
  SimConfig cfg;
  cfg.t1 = 10;
  cfg.init = {{"S", 3.96}, {"I", 0.04}, {"Q", 1}, {"W", 0}, {"V", 0}};
  Trajectory t = simulate(*r.composite, cfg);
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    double total = 0;
    for (double v : t.stock_values[k]) total += v;
    CHECK(total == doctest::Approx(5.0).epsilon(1e-12));
  }
}
