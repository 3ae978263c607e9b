#include <doctest.h>

#include <string>

#include "osnr/errors.hpp"
#include "osnr/matpower.hpp"
#include "testutil.hpp"

using namespace osnr;
using namespace osnr::matpower;

namespace {

const char* kTiny = R"(
function mpc = tiny
% two buses, one line
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0  0 0 0 1 1 0 230 1 1.1 0.9;
  2 1 50 10 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 50 0 100 -100 1 100 1 120 0;
];
mpc.branch = [
  1 2 0.01 0.1 0 100 100 100 0 0 1 -360 360;
];
mpc.gencost = [
  2 0 0 3 0.02 10 0;
];
)";

void expect_error(const std::string& text, ErrorKind kind, const char* needle) {
  try {
    const PowerCase pc = parse_case(text);
    validate_case(pc);
    FAIL("expected an error containing '" << needle << "'");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("hand-written two-bus fixture parses") {
  const PowerCase pc = parse_case(kTiny);
  CHECK(pc.base_mva == 100.0);
  CHECK(pc.buses.size() == 2);
  CHECK(pc.branches.size() == 1);
  CHECK(pc.gens.size() == 1);
  CHECK(pc.buses[1].pd_mw == 50.0);
  CHECK(pc.buses[0].type == BusType::ref);
  CHECK(pc.branches[0].x_pu == 0.1);
  CHECK(pc.gencosts[0].a == 0.02);
  CHECK(pc.gencosts[0].b == 10.0);
  validate_case(pc);
}

TEST_CASE("bundled nine-bus fixture has the expected shape") {
  const PowerCase pc = load_case_file(testutil::fixture_path("case9.m"));
  CHECK(pc.buses.size() == 9);
  CHECK(pc.branches.size() == 9);
  CHECK(pc.gens.size() == 3);
  CHECK(pc.base_mva == 100.0);
  validate_case(pc);
}

TEST_CASE("bundled fixtures all validate") {
  for (const char* name : {"case2.m", "case9.m", "case_synth30.m"}) {
    const PowerCase pc = load_case_file(testutil::fixture_path(name));
    validate_case(pc);
  }
}

TEST_CASE("missing sections are reported by name") {
  expect_error("mpc.bus = [1 3 0;];", ErrorKind::parse, "baseMVA");
  std::string no_gen = kTiny;
  no_gen.replace(no_gen.find("mpc.gen "), 8, "mpc.xxx ");
  expect_error(no_gen, ErrorKind::parse, "mpc.gen");
}

TEST_CASE("malformed numeric tokens carry a line number") {
  std::string bad = kTiny;
  bad.replace(bad.find("0.01"), 4, "zz.1");
  try {
    parse_case(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("duplicate bus ids are rejected") {
  std::string dup = kTiny;
  dup.replace(dup.find("2 1 50"), 6, "1 1 50");
  expect_error(dup, ErrorKind::validation, "duplicate bus id 1");
}

TEST_CASE("cost polynomials beyond degree two are rejected") {
  std::string cubic = kTiny;
  cubic.replace(cubic.find("2 0 0 3 0.02 10 0;"), 18, "2 0 0 4 1 0.02 10 0;");
  expect_error(cubic, ErrorKind::unsupported_cost, "degree");
  std::string pw = kTiny;
  pw.replace(pw.find("2 0 0 3"), 7, "1 0 0 4");
  expect_error(pw, ErrorKind::unsupported_cost, "model");
}

TEST_CASE("validation names each broken invariant") {
  // dangling branch endpoint
  std::string dangling = kTiny;
  dangling.replace(dangling.find("1 2 0.01"), 8, "1 99 0.1");
  expect_error(dangling, ErrorKind::validation, "dangling branch");

  // two reference buses
  std::string two_refs = kTiny;
  two_refs.replace(two_refs.find("2 1 50"), 6, "2 3 50");
  expect_error(two_refs, ErrorKind::validation, "reference bus");

  // zero-reactance branch
  std::string zero_x = kTiny;
  zero_x.replace(zero_x.find("0.01 0.1"), 8, "0.01 0.0");
  expect_error(zero_x, ErrorKind::validation, "zero-reactance");

  // disconnected network
  std::string island = kTiny;
  island.replace(island.find("mpc.branch = [\n  1 2"), 20, "mpc.branch = [\n  1 1");
  expect_error(island, ErrorKind::degenerate_constraints, "disconnected");
}

TEST_CASE("gencost rows must match the generator count") {
  std::string extra = kTiny;
  extra.replace(extra.find("  2 0 0 3 0.02 10 0;"), 20,
                "  2 0 0 3 0.02 10 0;\n  2 0 0 3 0.1 1 0;");
  expect_error(extra, ErrorKind::validation, "gencost");
}

TEST_CASE("parse-write-parse is idempotent on the retained fields") {
  const PowerCase a = load_case_file(testutil::fixture_path("case9.m"));
  const PowerCase b = parse_case(write_case(a));
  CHECK(b.base_mva == a.base_mva);
  REQUIRE(b.buses.size() == a.buses.size());
  REQUIRE(b.branches.size() == a.branches.size());
  REQUIRE(b.gens.size() == a.gens.size());
  for (std::size_t i = 0; i < a.buses.size(); ++i) {
    CHECK(b.buses[i].id == a.buses[i].id);
    CHECK(b.buses[i].type == a.buses[i].type);
    CHECK(b.buses[i].pd_mw == a.buses[i].pd_mw);
  }
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    CHECK(b.branches[i].from == a.branches[i].from);
    CHECK(b.branches[i].to == a.branches[i].to);
    CHECK(b.branches[i].x_pu == a.branches[i].x_pu);
    CHECK(b.branches[i].rate_a_mva == a.branches[i].rate_a_mva);
  }
  for (std::size_t i = 0; i < a.gens.size(); ++i) {
    CHECK(b.gens[i].bus == a.gens[i].bus);
    CHECK(b.gencosts[i].a == a.gencosts[i].a);
    CHECK(b.gencosts[i].b == a.gencosts[i].b);
  }
}

TEST_CASE("scientific notation parses") {
  std::string sci = kTiny;
  sci.replace(sci.find("0.1 0"), 5, "1e-1 0");
  const PowerCase pc = parse_case(sci);
  CHECK(pc.branches[0].x_pu == 0.1);
}
