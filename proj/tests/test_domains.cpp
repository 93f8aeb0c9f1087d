#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "macdec/domains/toys.hpp"
#include "macdec/domains/warehouse.hpp"
#include "macdec/evaluate.hpp"
#include "macdec/executor.hpp"
#include "oracle.hpp"

using namespace macdec;

namespace {

/// Robot placements times, per box, its depots plus every possible carrier
/// group plus the goal, times three light settings in scenario 3.
std::size_t count_by_hand(const WarehouseConfig& cfg) {
  std::size_t n = 1;
  for (std::size_t r = 0; r < cfg.robots; ++r) n *= cfg.layout.cells.size();
  for (const auto& b : cfg.boxes) {
    const std::size_t depots = b.depot == 0 ? 2 : 1;
    const std::size_t holders = b.size == BoxSize::Small ? cfg.robots : cfg.robots * (cfg.robots - 1) / 2;
    n *= depots + holders + 1;
  }
  if (cfg.scenario == Scenario::GlobalSignal) n *= 3;
  return n;
}

std::size_t option(const Domain& d, const char* name) {
  auto m = d.options.find(0, name);
  REQUIRE(m.has_value());
  return *m;
}

std::size_t signal(const Domain& d, std::size_t m, const char* name) {
  auto s = find_signal(d.options.at(0, m), name);
  REQUIRE(s.has_value());
  return *s;
}

bool has_where(const std::vector<Violation>& v, const std::string& prefix) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.where.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_CASE("toys") {
  for (const auto& name : toy_names()) {
    auto d = gen_toy(name);
    CHECK(d.name == name);
    CHECK(validate(d.model).empty());
    CHECK(validate_options(d.model, d.options).empty());
  }
  CHECK_THROWS_AS(gen_toy("nope"), std::invalid_argument);

  auto f = gen_toy("fig3-shape");
  REQUIRE(f.options.agents[0].size() == 2);
  CHECK(f.options.at(0, 0).signals.size() == 2);
  CHECK(f.options.at(0, 1).signals.size() == 3);

  // the stored optimum agrees with the trajectory-sum oracle
  auto coin = gen_toy("coin-coord");
  REQUIRE(coin.known_optimum);
  CHECK(oracle::brute_force(coin.model, coin.options, 2, 2).value == doctest::Approx(*coin.known_optimum).epsilon(1e-12));
}

TEST_CASE("scenario option sets") {
  const std::pair<Scenario, std::size_t> expect[] = {
      {Scenario::NoComm, 6}, {Scenario::LocalComm, 10}, {Scenario::GlobalSignal, 11}};
  for (auto [scenario, count] : expect) {
    CAPTURE(static_cast<int>(scenario));
    auto d = gen_warehouse(fixtures::mini_warehouse(scenario));
    CHECK(d.name == "warehouse-s" + std::to_string(static_cast<int>(scenario)));
    for (std::size_t i = 0; i < 2; ++i) CHECK(d.options.agents[i].size() == count);
    CHECK(validate(d.model).empty());
    CHECK(validate_options(d.model, d.options).empty());
  }
}

TEST_CASE("scenario 1 applicability") {
  auto d = gen_warehouse(fixtures::mini_warehouse());
  const auto go1 = option(d, "go_depot1"), go2 = option(d, "go_depot2"), to_drop = option(d, "go_dropoff");
  const auto small = option(d, "pick_small"), large = option(d, "pick_large"), drop = option(d, "drop");
  CHECK(root_options(d.options, 0) == std::vector<std::size_t>{go1, go2});
  // drop only right after reaching the drop-off, which needs a box in hand
  for (std::size_t p = 0; p < d.options.agents[0].size(); ++p)
    for (std::size_t s = 0; s < d.options.at(0, p).signals.size(); ++s) {
      const auto next = successors(d.options, 0, p, s);
      const bool has_drop = std::find(next.begin(), next.end(), drop) != next.end();
      const bool has_go = std::find(next.begin(), next.end(), to_drop) != next.end();
      CHECK(has_drop == (p == to_drop));
      CHECK(has_go == ((p == small || p == large) && d.options.at(0, p).signals[s] == "holding"));
    }
  for (auto go : {go1, go2}) {
    const auto next = successors(d.options, 0, go, signal(d, go, "large"));
    CHECK(std::find(next.begin(), next.end(), large) != next.end());
    CHECK(std::find(next.begin(), next.end(), small) == next.end());
    const auto empty = successors(d.options, 0, go, signal(d, go, "empty"));
    CHECK(std::find(empty.begin(), empty.end(), large) == empty.end());
  }
}

TEST_CASE("scenario 2 depot options start from the waiting room") {
  auto d = gen_warehouse(fixtures::mini_warehouse(Scenario::LocalComm));
  const auto go1 = option(d, "go_depot1");
  const auto drop = option(d, "drop");
  CHECK_FALSE(d.options.at(0, go1).root_applicable);
  CHECK_FALSE(applicable(d.options.at(0, go1), Context::after(drop, 0)));
  const auto wait = option(d, "go_waiting");
  CHECK(applicable(d.options.at(0, go1), Context::after(wait, signal(d, wait, "alone"))));

  auto cfg = fixtures::mini_warehouse(Scenario::LocalComm);
  cfg.depot_from_waiting_only = false;
  auto free = gen_warehouse(cfg);
  CHECK(free.options.at(0, go1).root_applicable);
  CHECK(applicable(free.options.at(0, go1), Context::after(drop, 0)));
}

TEST_CASE("scenario 3 light options") {
  auto d = gen_warehouse(fixtures::mini_warehouse(Scenario::GlobalSignal));
  const auto off1 = option(d, "off_go_depot1");
  const auto wait = option(d, "go_waiting");
  CHECK(applicable(d.options.at(0, off1), Context::after(wait, signal(d, wait, "red"))));
  CHECK_FALSE(applicable(d.options.at(0, off1), Context::start()));
  const auto blue = option(d, "light_blue");
  const auto go1 = option(d, "go_depot1");
  CHECK(applicable(d.options.at(0, blue), Context::after(go1, signal(d, go1, "large"))));
  CHECK_FALSE(applicable(d.options.at(0, blue), Context::start()));
}

TEST_CASE("state counts") {
  WarehouseConfig one;
  one.robots = 1;
  one.layout = {"one", {{"x", Region::Dropoff}}, {}};
  CHECK(count_states(one) == 1);

  WarehouseConfig grid;
  grid.layout = layout_grid9();
  CHECK(count_states(grid) == 81);

  for (auto scenario : {Scenario::NoComm, Scenario::LocalComm, Scenario::GlobalSignal}) {
    auto cfg = fixtures::mini_warehouse(scenario);
    CHECK(count_states(cfg) == count_by_hand(cfg));
    CHECK(gen_warehouse(cfg).model.num_states() == count_states(cfg));
  }
  auto three = fixtures::three_box_warehouse();
  three.robots = 3;
  three.boxes.push_back({BoxSize::Large, 0});
  CHECK(count_states(three) == count_by_hand(three));
}

TEST_CASE("state codec is a bijection and every reachable state is named") {
  auto cfg = fixtures::mini_warehouse();
  WarehouseCodec codec(cfg);
  auto d = gen_warehouse(cfg);
  std::set<std::string> names;
  for (std::size_t s = 0; s < codec.num_states(); ++s) {
    CHECK(codec.encode(codec.decode(s)) == s);
    names.insert(codec.name(s));
  }
  CHECK(names.size() == codec.num_states());
  const auto reach = oracle::reachable_states(d.model);
  CHECK(reach.size() <= d.model.num_states());
  CHECK(reach.size() > 1);
}

TEST_CASE("large box moves only with two co-located carriers") {
  auto cfg = fixtures::mini_warehouse();
  WarehouseCodec codec(cfg);
  auto d = gen_warehouse(cfg);
  for (auto s : oracle::reachable_states(d.model)) {
    const auto st = codec.decode(s);
    const auto& big = st.boxes[1];
    if (big.kind == BoxLocation::Kind::Held) {
      REQUIRE(big.carriers.size() == 2);
      CHECK(st.robot_cell[big.carriers[0]] == st.robot_cell[big.carriers[1]]);
    }
    for (std::size_t a = 0; a < d.model.num_joint_actions(); ++a)
      for (const auto& e : d.model.transition(s, a)) {
        const auto next = codec.decode(e.index);
        if (next.boxes[1].kind == BoxLocation::Kind::Goal) CHECK(big.kind != BoxLocation::Kind::Depot);
      }
  }
}

TEST_CASE("independent moves combine as a product") {
  auto d = gen_warehouse(fixtures::mini_warehouse());
  const auto& m = d.model;
  const auto s = *m.find_state("r=drop,drop/b=dep1,dep2");
  const auto to1 = *m.find_action(0, "to_dep1");
  const auto row = m.transition(s, m.encode_action(std::vector<std::size_t>{to1, to1}));
  std::map<std::string, double> got;
  for (const auto& e : row) got[m.state_names()[e.index]] = e.prob;
  CHECK(got.size() == 4);
  CHECK(got["r=dep1,dep1/b=dep1,dep2"] == doctest::Approx(0.81));
  CHECK(got["r=dep1,drop/b=dep1,dep2"] == doctest::Approx(0.09));
  CHECK(got["r=drop,dep1/b=dep1,dep2"] == doctest::Approx(0.09));
  CHECK(got["r=drop,drop/b=dep1,dep2"] == doctest::Approx(0.01));
}

TEST_CASE("delivery rewards") {
  auto cfg = fixtures::mini_warehouse();
  WarehouseCodec codec(cfg);
  auto d = gen_warehouse(cfg);
  const auto& m = d.model;
  const auto drop = codec.cell(Region::Dropoff);
  WarehouseState st;
  st.robot_cell = {drop, drop};
  st.boxes = {{BoxLocation::Kind::Held, 1, {0}}, {BoxLocation::Kind::Depot, 2, {}}};
  const auto s = codec.encode(st);
  const auto a = m.encode_action(std::vector<std::size_t>{*m.find_action(0, "drop"), *m.find_action(1, "noop")});
  CHECK(m.reward(s, a) == doctest::Approx(cfg.small_reward - 2 * cfg.step_cost));
  const auto idle = m.encode_action(std::vector<std::size_t>{0, 0});
  CHECK(m.reward(s, idle) == doctest::Approx(-2 * cfg.step_cost));
}

TEST_CASE("config validation") {
  auto cfg = fixtures::mini_warehouse();
  CHECK(validate_config(cfg).empty());

  auto lonely = cfg;
  lonely.robots = 1;
  CHECK(has_where(validate_config(lonely), "box 1"));
  CHECK_NOTHROW(gen_warehouse(lonely));

  auto no_depot = cfg;
  no_depot.layout.cells[1].region = Region::Corridor;
  CHECK(has_where(validate_config(no_depot), "layout depot1"));
  CHECK_THROWS_AS(gen_warehouse(no_depot), ValidationError);

  auto noisy = cfg;
  noisy.nav_noise = 1.0;
  CHECK(has_where(validate_config(noisy), "nav_noise"));

  auto big = cfg;
  big.state_cap = 100;
  try {
    gen_warehouse(big);
    FAIL("expected CapExceeded");
  } catch (const CapExceeded& e) {
    CHECK(e.count() == 192);
  }
}

TEST_CASE("config text round trip") {
  auto cfg = fixtures::three_box_warehouse();
  cfg.scenario = Scenario::GlobalSignal;
  cfg.start = {"dep1", "drop"};
  cfg.push_noise = 0.3;
  CHECK(parse_gen_config(emit_warehouse_config(cfg)).warehouse == cfg);

  auto custom = fixtures::mini_warehouse();
  custom.layout = layout_hall5();
  custom.layout.name = "custom";
  CHECK(parse_gen_config(emit_warehouse_config(custom)).warehouse == custom);

  auto toy = parse_gen_config("toy: coin-coord\n");
  CHECK(generate(toy).name == "coin-coord");
  CHECK_THROWS_AS(parse_gen_config("robots: 2\nwings: 3\n"), ParseError);
  CHECK_THROWS_AS(parse_gen_config("box: medium depot1\n"), ParseError);
}

TEST_CASE("baselines span the horizon and option durations are lower bounds") {
  auto cfg = fixtures::mini_warehouse();
  auto d = gen_warehouse(cfg);
  const int h = 8;
  for (const auto& name : warehouse_baselines()) {
    CAPTURE(name);
    auto jp = warehouse_baseline(cfg, d.options, name, h);
    CHECK(validate_policy(d.options, jp).empty());
    for (const auto& t : jp) CHECK(guaranteed_steps(t) >= h);
    auto stats = batch_stats(d.model, d.options, jp, h, 200, 3, {}, [&](const EpisodeTrace& tr) {
      for (std::size_t i = 0; i < 2; ++i) {
        int run = 0;
        for (const auto& step : tr.steps) {
          ++run;
          if (step.agents[i].terminated) {
            CHECK(run >= d.options.at(i, step.agents[i].option).min_duration);
            run = 0;
          }
        }
      }
    });
    CHECK(stats.falloff_episodes == 0);
  }
  CHECK_THROWS(warehouse_baseline(cfg, d.options, "nope", h));
}
