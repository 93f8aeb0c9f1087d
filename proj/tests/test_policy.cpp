#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "macdec/domains/toys.hpp"
#include "macdec/domains/warehouse.hpp"
#include "macdec/evaluate.hpp"
#include "macdec/model_io.hpp"
#include "macdec/options_io.hpp"
#include "macdec/policy_io.hpp"
#include "oracle.hpp"

using namespace macdec;

namespace {

const char* kOneOption = R"(option go agent=0 root=1 min_dur=1
signals: done
pi: * : go 1
beta: * 1
signal: * done
init: *
)";

Tree chain(const OptionSet& o, int depth) {
  Tree t = make_leaf(o, 0, 0);
  for (int d = 1; d < depth; ++d) t = attach(o, 0, 0, {{0, t}});
  return t;
}

}  // namespace

TEST_CASE("leaves") {
  auto d = gen_toy("fig3-shape");
  auto m1 = make_leaf(d.options, 0, 0);
  auto m2 = make_leaf(d.options, 0, 1);
  CHECK(m1->depth() == 1);
  CHECK(m1->is_leaf());
  CHECK(m2->is_leaf());
  CHECK(m2->children().size() == 3);
  for (const auto& c : m2->children()) CHECK(c == nullptr);
  // m2 may not start an episode in this check
  auto opts = d.options;
  opts.agents[0][1].root_applicable = false;
  CHECK(validate_policy(opts, {make_leaf(opts, 0, 1)}).size() == 1);
  CHECK(validate_policy(opts, {m1}).empty());
}

TEST_CASE("attach") {
  auto d = gen_toy("fig3-shape");
  const auto& o = d.options;
  auto t = attach(o, 0, 0, {{0, make_leaf(o, 0, 0)}, {1, make_leaf(o, 0, 1)}});
  CHECK(t->depth() == 2);
  CHECK(t->option() == 0);
  CHECK(t->child(0)->option() == 0);
  CHECK(t->child(1)->option() == 1);
  CHECK(to_string(o, 0, t) == "m1{s1:m1,s2:m2}");
  CHECK_THROWS_AS(attach(o, 0, 0, {{0, make_leaf(o, 0, 1)}}), PolicyError);
  CHECK_THROWS_AS(attach(o, 0, 0, {{5, make_leaf(o, 0, 0)}}), PolicyError);
  CHECK(structurally_equal(t, attach(o, 0, 0, {{0, make_leaf(o, 0, 0)}, {1, make_leaf(o, 0, 1)}})));
  CHECK_FALSE(structurally_equal(t, make_leaf(o, 0, 0)));
}

TEST_CASE("guaranteed steps") {
  auto m = parse_model(fixtures::kMinimalModel);
  auto o = parse_options(m, kOneOption);
  CHECK(guaranteed_steps(make_leaf(o, 0, 0)) == 1);
  CHECK(guaranteed_steps(chain(o, 3)) == 3);

  // a two-step navigation option followed by one-step pickups
  auto cfg = fixtures::mini_warehouse(Scenario::LocalComm);
  cfg.layout = layout_grid9();
  auto w = gen_warehouse(cfg);
  const auto nav = *w.options.find(0, "go_depot2");
  REQUIRE(w.options.at(0, nav).min_duration == 2);
  std::map<std::size_t, Tree> kids;
  for (std::size_t s = 0; s < w.options.signals(0, nav).size(); ++s) {
    auto next = successors(w.options, 0, nav, s);
    REQUIRE(!next.empty());
    auto pick = w.options.find(0, "pick_small");
    const auto choice = std::find(next.begin(), next.end(), *pick) != next.end() ? *pick : next.front();
    REQUIRE(w.options.at(0, choice).min_duration == 1);
    kids[s] = make_leaf(w.options, 0, choice);
  }
  CHECK(guaranteed_steps(attach(w.options, 0, nav, kids)) == 3);
}

TEST_CASE("exact evaluation, forced values") {
  auto m = parse_model(fixtures::kMinimalModel);
  auto o = parse_options(m, kOneOption);
  CHECK(evaluate_exact(m, o, {make_leaf(o, 0, 0)}, 3).value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(evaluate_exact(m, o, {chain(o, 3)}, 3).value == doctest::Approx(3.0).epsilon(1e-12));
  m.set_discount(0.5);
  CHECK(evaluate_exact(m, o, {chain(o, 2)}, 2).value == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate_exact(m, o, {chain(o, 2)}, 0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_exact(m, o, {}, 2), PolicyError);
}

TEST_CASE("leaf runs out before the horizon") {
  auto m = parse_model(fixtures::kMinimalModel);
  auto o = parse_options(m, kOneOption);
  auto r = evaluate_exact(m, o, {make_leaf(o, 0, 0)}, 3);
  CHECK(r.falloff_mass == doctest::Approx(1.0));
  auto full = evaluate_exact(m, o, {chain(o, 3)}, 3);
  CHECK(full.falloff_mass == 0.0);
}

TEST_CASE("exact evaluation matches trajectory sums on every depth-2 joint tree") {
  for (const auto& name : toy_names()) {
    CAPTURE(name);
    auto d = gen_toy(name);
    const int h = *d.model.horizon();
    const std::size_t n = d.options.num_agents();
    std::vector<std::vector<oracle::OTreePtr>> sets;
    for (std::size_t i = 0; i < n; ++i) sets.push_back(oracle::root_trees(d.options, i, 2));
    std::size_t checked = 0;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      std::vector<oracle::OTreePtr> joint;
      JointPolicy jp;
      for (std::size_t i = 0; i < n; ++i) {
        joint.push_back(sets[i][idx[i]]);
        jp.push_back(oracle::to_tree(d.options, i, joint.back()));
      }
      const double want = oracle::TrajectorySum(d.model, d.options, joint).value(h);
      const auto got = evaluate_exact(d.model, d.options, jp, h);
      CHECK(got.value == doctest::Approx(want).epsilon(1e-12));
      for (double mass : got.depth_mass) CHECK(std::abs(mass - 1.0) <= 1e-9);
      ++checked;
      std::size_t i = n;
      while (i > 0 && ++idx[i - 1] == sets[i - 1].size()) idx[--i] = 0;
      if (i == 0) break;
    }
    CHECK(checked > 1);
  }
}

TEST_CASE("start values average to the b0 value") {
  auto d = gen_toy("relay-discount");
  auto sol = oracle::root_trees(d.options, 0, 3);
  JointPolicy jp{oracle::to_tree(d.options, 0, sol[7]), oracle::to_tree(d.options, 1, sol[3])};
  auto r = evaluate_exact(d.model, d.options, jp, 3, {.occupancy = true, .all_start_states = true});
  REQUIRE(r.start_values.size() == 2);
  double mix = 0.0;
  for (auto [s, v] : r.start_values) mix += d.model.initial_belief()[s] * v;
  CHECK(mix == doctest::Approx(r.value).epsilon(1e-12));
  REQUIRE(r.occupancy.size() == 3);
  for (const auto& row : r.occupancy) {
    double total = 0.0;
    for (double p : row) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo evaluation") {
  SUBCASE("deterministic toy: exact mean, zero error") {
    auto d = gen_toy("fig3-shape");
    auto trees = oracle::root_trees(d.options, 0, 4);
    for (std::size_t k = 0; k < trees.size(); k += 97) {
      JointPolicy jp{oracle::to_tree(d.options, 0, trees[k])};
      auto exact = evaluate_exact(d.model, d.options, jp, 4);
      auto mc = evaluate_mc(d.model, d.options, jp, 4, 200, 11);
      CHECK(mc.stderr_ == 0.0);
      CHECK(mc.mean == doctest::Approx(exact.value).epsilon(1e-12));
    }
  }
  SUBCASE("same seed, same estimate") {
    auto d = gen_toy("chain-cooperate");
    JointPolicy jp{oracle::to_tree(d.options, 0, oracle::root_trees(d.options, 0, 3)[40]),
                   oracle::to_tree(d.options, 1, oracle::root_trees(d.options, 1, 3)[9])};
    auto a = evaluate_mc(d.model, d.options, jp, 3, 5000, 42);
    auto b = evaluate_mc(d.model, d.options, jp, 3, 5000, 42);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    auto exact = evaluate_exact(d.model, d.options, jp, 3);
    CHECK(std::abs(a.mean - exact.value) <= 3.0 * a.stderr_);
  }
  CHECK(summarize({2.0, 2.0, 2.0}).stderr_ == 0.0);
  CHECK(summarize({1.0, 3.0}).mean == 2.0);
  CHECK(summarize({1.0, 3.0}).stderr_ == doctest::Approx(1.0));
}

TEST_CASE("policy JSON round trip") {
  auto d = gen_toy("coin-coord");
  auto t0 = oracle::to_tree(d.options, 0, oracle::root_trees(d.options, 0, 2)[4]);
  auto t1 = oracle::to_tree(d.options, 1, oracle::root_trees(d.options, 1, 2)[1]);
  JointPolicy jp{t0, t1};
  auto back = parse_policy(d.options, emit_policy(d.options, jp));
  REQUIRE(back.size() == 2);
  CHECK(structurally_equal(back[0], t0));
  CHECK(structurally_equal(back[1], t1));
  CHECK_THROWS(parse_policy(d.options, R"({"agents": [{"option": "nope"}, {"option": "listen"}]})"));
}

TEST_CASE("flatten shares subtrees") {
  auto d = gen_toy("fig3-shape");
  const auto& o = d.options;
  auto leaf = make_leaf(o, 0, 0);
  auto t = attach(o, 0, 0, {{0, leaf}, {1, leaf}});
  auto f = flatten(t);
  CHECK(f.size() == 2);
  CHECK(f.child[0][0] == f.child[0][1]);
  CHECK(count_nodes(t) == 2);
}
