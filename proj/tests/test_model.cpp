#include <doctest.h>

#include <cmath>
#include <string>

#include "fixtures.hpp"
#include "macdec/domains/toys.hpp"
#include "macdec/domains/warehouse.hpp"
#include "macdec/model_io.hpp"

using namespace macdec;

namespace {

std::string replace(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

const char* kCoinFlip = R"(agents: 1
states: s0 s1
start: s0
horizon: 2
discount: 1
actions[0]: flip
observations[0]: o
T: flip : s0 : s0 0.5
T: flip : s0 : s1 0.5
T: flip : s1 : s0 0.5
T: flip : s1 : s1 0.5
default_O: uniform
)";

bool row_stochastic(const ModelSpec& m) {
  for (std::size_t s = 0; s < m.num_states(); ++s)
    for (std::size_t a = 0; a < m.num_joint_actions(); ++a) {
      double t = 0.0;
      for (auto& e : m.transition(s, a)) {
        if (e.prob < 0.0) return false;
        t += e.prob;
      }
      if (std::abs(t - 1.0) > kProbTolerance) return false;
      double o = 0.0;
      for (auto& e : m.observe(a, s)) o += e.prob;
      if (std::abs(o - 1.0) > kProbTolerance) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("minimal model parses") {
  auto m = parse_model(fixtures::kMinimalModel);
  CHECK(m.num_states() == 1);
  CHECK(m.num_agents() == 1);
  CHECK(m.horizon() == 3);
  CHECK(validate(m).empty());
}

TEST_CASE("transition row summing to 0.9 names the row") {
  auto text = replace(fixtures::kMinimalModel, "T: go : only : only 1", "T: go : only : only 0.9");
  try {
    parse_model(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].where == "T(s=only, a=go)");
    CHECK(e.violations()[0].residual == doctest::Approx(-0.1));
  }
}

TEST_CASE("parse errors carry line numbers") {
  auto text = replace(fixtures::kMinimalModel, "T: go : only : only 1", "T: go : nowhere : only 1");
  try {
    parse_model(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
    CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_model(replace(fixtures::kMinimalModel, "actions[0]: go", "actions[0]: go\nbogus: 1")),
                  ParseError);
  CHECK_THROWS_AS(parse_model(replace(fixtures::kMinimalModel, "O: go : only : see 1\n", "")), ParseError);
  CHECK_THROWS_AS(parse_model(replace(fixtures::kMinimalModel, "T: go : only : only 1", "T: stay : only : only 1")),
                  ParseError);
}

TEST_CASE("validate reports b0 and negative entries") {
  auto m = parse_model(fixtures::kMinimalModel);
  CHECK(validate(m).empty());

  auto zero = m;
  zero.set_initial_belief({0.0});
  auto v = validate(zero);
  REQUIRE(v.size() == 1);
  CHECK(v[0].where == "b0");

  auto neg = m;
  neg.set_transition(0, 0, {{0, -0.5}});
  v = validate(neg);
  REQUIRE(!v.empty());
  CHECK(v[0].where == "T(s=only, a=go) entry 0");

  auto inf = m;
  inf.set_horizon(std::nullopt);
  v = validate(inf);
  REQUIRE(v.size() == 1);
  CHECK(v[0].where == "discount");
  inf.set_discount(0.95);
  CHECK(validate(inf).empty());
}

TEST_CASE("transition queries") {
  auto ident = parse_model(replace(fixtures::kMinimalModel, "T: go : only : only 1\n", "default_T: identity\n"));
  CHECK(ident.transition(0, 0) == SparseDist{{0, 1.0}});

  auto coin = parse_model(kCoinFlip);
  CHECK(coin.transition(0, 0) == SparseDist{{0, 0.5}, {1, 0.5}});
  CHECK(coin.transition(0, 0) == coin.transition(0, 0));
  CHECK_THROWS_AS(coin.transition(2, 0), std::out_of_range);
}

TEST_CASE("reward queries") {
  auto zero = parse_model(replace(fixtures::kMinimalModel, "R: go : only 1", "R: go : only 0"));
  CHECK(zero.reward(0, 0) == 0.0);
  auto cost = parse_model(replace(fixtures::kMinimalModel, "R: go : only 1", "R: go : only -1"));
  CHECK(cost.reward(0, 0) == -1.0);
}

TEST_CASE("joint encodings are mixed radix, agent 0 first") {
  auto d = gen_toy("coin-coord");
  const auto& m = d.model;
  CHECK(m.num_joint_actions() == 9);
  CHECK(m.encode_action(std::vector<std::size_t>{1, 2}) == 5);
  CHECK(m.decode_action(5).parts == std::vector<std::size_t>{1, 2});
  for (std::size_t o = 0; o < m.num_joint_observations(); ++o)
    CHECK(m.encode_observation(m.decode_observation(o)) == o);
}

TEST_CASE("emit then parse is the identity") {
  for (const auto& name : toy_names()) {
    CAPTURE(name);
    auto d = gen_toy(name);
    CHECK(parse_model(emit_model(d.model)) == d.model);
  }
  for (auto scenario : {Scenario::NoComm, Scenario::LocalComm, Scenario::GlobalSignal}) {
    CAPTURE(static_cast<int>(scenario));
    auto d = gen_warehouse(fixtures::mini_warehouse(scenario));
    const auto text = emit_model(d.model);
    auto back = parse_model(text);
    CHECK(back == d.model);
    CHECK(emit_model(back) == text);
  }
}

TEST_CASE("generated models are row-stochastic") {
  for (const auto& name : toy_names()) CHECK(row_stochastic(gen_toy(name).model));
  CHECK(row_stochastic(gen_warehouse(fixtures::mini_warehouse()).model));
  CHECK(row_stochastic(gen_warehouse(fixtures::three_box_warehouse()).model));
}

TEST_CASE("make_dist merges and sorts") {
  CHECK(make_dist({{2, 0.25}, {0, 0.5}, {2, 0.25}, {1, 0.0}}) == SparseDist{{0, 0.5}, {2, 0.5}});
}
