#include <doctest.h>

#include <string>

#include "fixtures.hpp"
#include "macdec/domains/toys.hpp"
#include "macdec/domains/warehouse.hpp"
#include "macdec/model_io.hpp"
#include "macdec/options_io.hpp"

using namespace macdec;

namespace {

const char* kOneOption = R"(option go agent=0 root=1 min_dur=1
signals: done
pi: * : go 1
beta: * 1
signal: * done
init: *
)";

bool has_message(const std::vector<Violation>& v, const std::string& text) {
  for (const auto& x : v)
    if (x.message.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("options file parses and round-trips") {
  auto m = parse_model(fixtures::kMinimalModel);
  auto o = parse_options(m, kOneOption);
  REQUIRE(o.num_agents() == 1);
  const auto& go = o.at(0, 0);
  CHECK(go.name == "go");
  CHECK(go.root_applicable);
  CHECK(go.applicable_anywhere);
  CHECK(go.policy.size() == 2);  // one observation plus START
  CHECK(go.termination == std::vector<double>{1.0});
  CHECK(parse_options(m, emit_options(m, o)) == o);

  for (const auto& name : toy_names()) {
    auto d = gen_toy(name);
    CHECK(parse_options(d.model, emit_options(d.model, d.options)) == d.options);
  }
  auto w = gen_warehouse(fixtures::mini_warehouse(Scenario::LocalComm));
  CHECK(parse_options(w.model, emit_options(w.model, w.options)) == w.options);
}

TEST_CASE("options parse errors") {
  auto m = parse_model(fixtures::kMinimalModel);
  std::string bad = kOneOption;
  bad.replace(bad.find("pi: * : go 1"), 12, "pi: * : jump 1");
  CHECK_THROWS_AS(parse_options(m, bad), ParseError);
  CHECK_THROWS_AS(parse_options(m, "pi: * : go 1\n"), ParseError);
}

TEST_CASE("validate_options") {
  auto w = gen_warehouse(fixtures::mini_warehouse());
  CHECK(validate_options(w.model, w.options).empty());

  auto m = parse_model(fixtures::kMinimalModel);
  auto o = parse_options(m, kOneOption);
  CHECK(validate_options(m, o).empty());

  auto no_root = o;
  no_root.agents[0][0].root_applicable = false;
  CHECK(has_message(validate_options(m, no_root), "no root-applicable option"));

  auto never_ends = o;
  never_ends.agents[0][0].termination = {0.0};
  CHECK(has_message(validate_options(m, never_ends), "termination is identically 0"));

  auto no_signal = o;
  no_signal.agents[0][0].signal_of = {kNoSignal};
  CHECK(has_message(validate_options(m, no_signal), "terminating observation has no signal"));
}

TEST_CASE("applicability") {
  auto d = gen_toy("fig3-shape");
  const auto& m1 = d.options.at(0, 0);
  const auto& m2 = d.options.at(0, 1);
  const auto s1 = *find_signal(m1, "s1");
  const auto s2 = *find_signal(m1, "s2");
  CHECK(applicable(m1, Context::start()));
  CHECK(applicable(m2, Context::after(0, s2)));
  CHECK_FALSE(applicable(m2, Context::after(0, s1)));
  CHECK(successors(d.options, 0, 0, s1) == std::vector<std::size_t>{0});
  CHECK(successors(d.options, 0, 0, s2) == std::vector<std::size_t>{0, 1});
  // m2's s1 and s3 are followed by m1 only
  CHECK(successors(d.options, 0, 1, *find_signal(m2, "s1")) == std::vector<std::size_t>{0});
  CHECK(successors(d.options, 0, 1, *find_signal(m2, "s3")) == std::vector<std::size_t>{0});

  OptionSpec only;
  only.initiation = {{1, 2}};
  CHECK(applicable(only, Context::after(1, 2)));
  CHECK_FALSE(applicable(only, Context::after(0, 0)));
  CHECK_FALSE(applicable(only, Context::start()));
}

TEST_CASE("min durations") {
  OptionSpec plain;
  CHECK(min_duration_bound(plain) == 1);

  auto w = gen_warehouse(fixtures::mini_warehouse());
  CHECK(min_duration_bound(w.options.at(0, *w.options.find(0, "pick_small"))) == 1);
  CHECK(min_duration_bound(w.options.at(0, *w.options.find(0, "drop"))) == 1);

  // grid9, depots reached from the waiting room only: wait is two cells from depot 2, four from depot 1
  auto cfg = fixtures::mini_warehouse(Scenario::LocalComm);
  cfg.layout = layout_grid9();
  auto g = gen_warehouse(cfg);
  const auto dist = cell_distances(cfg.layout);
  WarehouseCodec codec(cfg);
  const auto wait = codec.cell(Region::Waiting);
  CHECK(min_duration_bound(g.options.at(0, *g.options.find(0, "go_depot2"))) ==
        dist[wait][codec.cell(Region::Depot2)]);
  CHECK(min_duration_bound(g.options.at(0, *g.options.find(0, "go_depot2"))) == 2);
  CHECK(min_duration_bound(g.options.at(0, *g.options.find(0, "go_depot1"))) == 4);
}
