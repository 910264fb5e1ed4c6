#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "support.hpp"

using namespace sfd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run sfc(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return testing::fixture_path(name).string(); }

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "stockflow-cli-test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool isomorphic(const StockFlowDiagram& a, const StockFlowDiagram& b) {
  auto F = iso_check(share(a), share(b));
  return F && testing::oracle_is_iso(*F);
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(sfc({}).code == 2);
  CHECK(sfc({"frobnicate"}).code == 2);
  CHECK(sfc({"validate"}).code == 2);
  CHECK(sfc({"simulate", fixture("sir.json"), "--init", "S=abc"}).code == 2);
  CHECK(sfc({"simulate", fixture("sir.json"), "--init", "S=1,I=1,R=0", "--method", "midpoint"}).code == 2);
  CHECK(sfc({"split", fixture("sir.json"), "--flow", "Recovery", "--parts", "not json"}).code == 2);
  CHECK(sfc({"--help"}).code == 0);
}

TEST_CASE("validate") {
  Run ok = sfc({"validate", fixture("sir.json")});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("3 stocks, 2 flows, 3 links") != std::string::npos);
  CHECK(ok.out.find("closed: yes") != std::string::npos);

  fs::path dir = scratch_dir("validate");
  write_file_atomic(dir / "bad.json", R"({"stocks":["A","B"],"flows":[{"id":"f","fn":"1"}],
    "inflows":[{"flow":"f","to":"A"},{"flow":"f","to":"B"}],"outflows":[],"links":[]})");
  Run bad = sfc({"validate", (dir / "bad.json").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("InvalidDiagram") != std::string::npos);
  CHECK(sfc({"validate", (dir / "missing.json").string()}).code == 1);
}

TEST_CASE("simulate writes a CSV") {
  Run r = sfc({"simulate", fixture("sir.json"), "--init", "S=990,I=10,R=0"});
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 1002);
  CHECK(r.out.rfind("t,S,I,R,Infection,Recovery\n", 0) == 0);

  fs::path dir = scratch_dir("simulate");
  Run euler = sfc({"simulate", fixture("sir.json"), "--init", "S=3.96,I=0.04,R=0", "--method", "euler",
                   "--t1", "1", "--dt", "0.5", "--csv-out", (dir / "out.csv").string()});
  CHECK(euler.code == 0);
  CHECK(euler.out.empty());
  CHECK(count_lines(read_file(dir / "out.csv")) == 4);

  CHECK(sfc({"simulate", fixture("sir.json"), "--init", "S=1,I=1"}).code == 1);
  CHECK(sfc({"simulate", fixture("updown_upstream.json"), "--init", "S=1,I=1", "--exo", "l9=t"}).code == 1);
}

TEST_CASE("pipeline and substitute") {
  fs::path dir = scratch_dir("pipeline");
  std::string out = (dir / "hospital.json").string();
  Run r = sfc({"--out", out, "pipeline", fixture("sir.json"), "--script", fixture("hospital_script.json")});
  CHECK(r.code == 0);
  CHECK(isomorphic(load(out), *testing::load_fixture("hospital_golden.json")));

  Run sub = sfc({"substitute", fixture("sir.json"), "--script", fixture("hospital_script.json")});
  CHECK(sub.code == 1);
  CHECK(sub.err.find("only substitute steps") != std::string::npos);
}

TEST_CASE("split and updown") {
  Run s = sfc({"split", fixture("sir.json"), "--flow", "Recovery", "--parts",
               R"([{"id": "a", "fn": "0.07 * l3"}, {"id": "b", "fn": "0.03 * l3"}])"});
  CHECK(s.code == 0);
  CHECK(from_json(s.out).flows().size() == 3);

  Run bad = sfc({"split", fixture("sir.json"), "--flow", "Recovery", "--parts",
                 R"([{"id": "a", "fn": "0.07 * l3"}, {"id": "b", "fn": "0.05 * l3"}])"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("SumMismatch") != std::string::npos);

  Run u = sfc({"updown", fixture("updown_upstream.json"), fixture("updown_downstream.json"), "--a", "I", "--b",
               "Q", "--flow", "Recovery"});
  CHECK(u.code == 0);
  CHECK(from_json(u.out).stocks().size() == 5);
}

TEST_CASE("decompose then recompose") {
  fs::path dir = scratch_dir("decompose");
  Run d = sfc({"decompose", fixture("hospital_golden.json"), "--out-dir", dir.string()});
  CHECK(d.code == 0);
  CHECK(fs::exists(dir / "index.json"));
  Run r = sfc({"recompose", dir.string()});
  CHECK(r.code == 0);
  CHECK(isomorphic(from_json(r.out), *testing::load_fixture("hospital_golden.json")));
  CHECK(sfc({"recompose", (dir / "nowhere").string()}).code == 1);
}

TEST_CASE("pushout from files") {
  fs::path dir = scratch_dir("pushout");
  write_file_atomic(dir / "apex.json", to_json(disc({"*"})));
  write_file_atomic(dir / "z.json",
                    R"({"diagram": )" + read_file(fixture("sir.json")) + R"(, "map": {"Stock": {"*": "R"}}})");
  write_file_atomic(dir / "y.json", R"({"diagram": )" + read_file(fixture("hospital_ward.json")) +
                                        R"(, "map": {"Stock": {"*": "IC"}}})");
  Run r = sfc({"pushout", (dir / "apex.json").string(), (dir / "z.json").string(), (dir / "y.json").string()});
  CHECK(r.code == 0);
  StockFlowDiagram P = from_json(r.out);
  CHECK(P.stocks().size() == 5);
  CHECK(P.flows().size() == 4);
}

TEST_CASE("export-dot") {
  Run r = sfc({"export-dot", fixture("sir.json")});
  CHECK(r.code == 0);
  testing::DotCounts c = testing::count_dot(r.out);
  CHECK(c.boxes == 3);
  CHECK(c.flow_edges == 2);
}
