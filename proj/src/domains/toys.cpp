#include "macdec/domains/toys.hpp"

#include <stdexcept>

namespace macdec {

SparseDist product_distribution(const ModelSpec& model, const std::vector<SparseDist>& per_agent) {
  std::vector<Entry> out{{0, 1.0}};
  for (std::size_t i = 0; i < per_agent.size(); ++i) {
    std::vector<Entry> next;
    for (const auto& e : out)
      for (const auto& f : per_agent[i]) {
        std::vector<std::size_t> parts = model.decode_observation(e.index).parts;
        parts[i] = f.index;
        next.push_back({model.encode_observation(parts), e.prob * f.prob});
      }
    out = std::move(next);
  }
  return make_dist(std::move(out));
}

namespace {

OptionSpec option(const ModelSpec& m, std::size_t agent, std::string name, std::vector<std::string> signals,
                  const SparseDist& policy, std::vector<double> beta, std::vector<std::size_t> signal_of) {
  OptionSpec o;
  o.name = std::move(name);
  o.agent = agent;
  o.signals = std::move(signals);
  o.policy.assign(m.num_observations(agent) + 1, policy);
  o.termination = std::move(beta);
  o.signal_of = std::move(signal_of);
  o.root_applicable = true;
  o.applicable_anywhere = true;
  return o;
}

Domain coin_coord() {
  // listen is 80% accurate; the coin only stays put while both listen
  ModelSpec m({"heads", "tails"}, {{"listen", "call_h", "call_t"}, {"listen", "call_h", "call_t"}},
              {{"hear_h", "hear_t"}, {"hear_h", "hear_t"}});
  m.set_initial_belief({0.5, 0.5});
  m.set_horizon(2);
  m.set_discount(1.0);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t a = 0; a < m.num_joint_actions(); ++a) {
      auto ja = m.decode_action(a).parts;
      const bool both_listen = ja[0] == 0 && ja[1] == 0;
      m.set_transition(s, a, both_listen ? SparseDist{{s, 1.0}} : SparseDist{{0, 0.5}, {1, 0.5}});
      double r = 0.0;
      int calls = 0, correct = 0;
      for (auto x : ja) {
        if (x == 0) {
          r -= 1.0;
        } else {
          ++calls;
          correct += (x == 1) == (s == 0) ? 1 : 0;
        }
      }
      if (calls == 2) r += correct == 2 ? 10.0 : correct == 1 ? -5.0 : -10.0;
      if (calls == 1) r += correct == 1 ? 2.0 : -5.0;
      m.set_reward(s, a, r);
    }
  for (std::size_t a = 0; a < m.num_joint_actions(); ++a) {
    auto ja = m.decode_action(a).parts;
    for (std::size_t s = 0; s < 2; ++s) {
      std::vector<SparseDist> per;
      for (auto x : ja)
        per.push_back(x == 0 ? make_dist({{s, 0.8}, {1 - s, 0.2}}) : SparseDist{{0, 0.5}, {1, 0.5}});
      m.set_observation(a, s, product_distribution(m, per));
    }
  }
  OptionSet o;
  o.agents.resize(2);
  for (std::size_t i = 0; i < 2; ++i) {
    o.agents[i].push_back(option(m, i, "listen", {"h", "t"}, {{0, 1.0}}, {1.0, 1.0}, {0, 1}));
    o.agents[i].push_back(option(m, i, "call_heads", {"done"}, {{1, 1.0}}, {1.0, 1.0}, {0, 0}));
    o.agents[i].push_back(option(m, i, "call_tails", {"done"}, {{2, 1.0}}, {1.0, 1.0}, {0, 0}));
  }
  // both listen (-2), then each calls what it heard: 0.64*10 - 0.32*5 - 0.04*10 = 4.4
  return {"coin-coord", std::move(m), std::move(o), 2.4};
}

Domain chain_cooperate() {
  ModelSpec m({"p0", "p1", "p2"}, {{"push", "rest"}, {"push", "rest"}}, {{"low", "high"}, {"low", "high"}});
  m.set_initial_belief({1.0, 0.0, 0.0});
  m.set_horizon(3);
  m.set_discount(1.0);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < m.num_joint_actions(); ++a) {
      auto ja = m.decode_action(a).parts;
      const int pushers = (ja[0] == 0) + (ja[1] == 0);
      if (s == 2) {
        m.set_transition(s, a, {{0, 1.0}});
      } else {
        const double adv = pushers == 2 ? 0.8 : pushers == 1 ? 0.3 : 0.0;
        m.set_transition(s, a, make_dist({{s, 1.0 - adv}, {s + 1, adv}}));
      }
      m.set_reward(s, a, (s == 2 ? 10.0 : 0.0) - pushers);
    }
  for (std::size_t a = 0; a < m.num_joint_actions(); ++a)
    for (std::size_t s = 0; s < 3; ++s) {
      const std::size_t o = s == 0 ? 0 : 1;
      m.set_observation(a, s, {{m.encode_observation(std::vector<std::size_t>{o, o}), 1.0}});
    }
  OptionSet o;
  o.agents.resize(2);
  for (std::size_t i = 0; i < 2; ++i) {
    o.agents[i].push_back(option(m, i, "push_hold", {"done"}, {{0, 1.0}}, {0.5, 1.0}, {0, 0}));
    o.agents[i].push_back(option(m, i, "push_once", {"low", "high"}, {{0, 1.0}}, {1.0, 1.0}, {0, 1}));
    o.agents[i].push_back(option(m, i, "rest", {"done"}, {{1, 1.0}}, {1.0, 1.0}, {0, 0}));
  }
  return {"chain-cooperate", std::move(m), std::move(o), std::nullopt};
}

Domain relay_discount() {
  ModelSpec m({"left", "right"}, {{"stay", "move"}, {"stay", "move"}}, {{"at_left", "at_right"}, {"at_left", "at_right"}});
  m.set_initial_belief({0.6, 0.4});
  m.set_horizon(3);
  m.set_discount(0.9);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t a = 0; a < m.num_joint_actions(); ++a) {
      auto ja = m.decode_action(a).parts;
      const int movers = (ja[0] == 1) + (ja[1] == 1);
      const double flip = movers == 2 ? 0.9 : movers == 1 ? 0.5 : 0.0;
      m.set_transition(s, a, make_dist({{s, 1.0 - flip}, {1 - s, flip}}));
      double r = -0.2 * movers;
      if (movers == 0) r += s == 1 ? 3.0 : -1.0;
      m.set_reward(s, a, r);
    }
  for (std::size_t a = 0; a < m.num_joint_actions(); ++a)
    for (std::size_t s = 0; s < 2; ++s)
      m.set_observation(a, s, {{m.encode_observation(std::vector<std::size_t>{s, s}), 1.0}});
  OptionSet o;
  o.agents.resize(2);
  for (std::size_t i = 0; i < 2; ++i) {
    o.agents[i].push_back(option(m, i, "drift", {"left", "right"}, {{0, 0.5}, {1, 0.5}}, {0.5, 0.5}, {0, 1}));
    o.agents[i].push_back(option(m, i, "toggle", {"done"}, {{1, 1.0}}, {1.0, 1.0}, {0, 0}));
    o.agents[i].push_back(option(m, i, "hold", {"done"}, {{0, 1.0}}, {1.0, 1.0}, {0, 0}));
  }
  return {"relay-discount", std::move(m), std::move(o), std::nullopt};
}

Domain fig3_shape() {
  // a: s1 -> s2 -> s3 -> s1, b: s1 -> s3 -> s2 -> s1; observations name the state
  ModelSpec m({"s1", "s2", "s3"}, {{"a", "b"}}, {{"o1", "o2", "o3"}});
  m.set_initial_belief({1.0, 0.0, 0.0});
  m.set_horizon(4);
  m.set_discount(1.0);
  const std::size_t next_a[3] = {1, 2, 0};
  const std::size_t next_b[3] = {2, 0, 1};
  for (std::size_t s = 0; s < 3; ++s) {
    m.set_transition(s, 0, {{next_a[s], 1.0}});
    m.set_transition(s, 1, {{next_b[s], 1.0}});
  }
  m.set_reward(1, 0, 1.0);
  m.set_reward(2, 1, 2.0);
  m.set_reward(0, 1, 0.5);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t s = 0; s < 3; ++s) m.set_observation(a, s, {{s, 1.0}});
  OptionSet o;
  o.agents.resize(1);
  auto m1 = option(m, 0, "m1", {"s1", "s2"}, {{0, 1.0}}, {1.0, 1.0, 0.0}, {0, 1, kNoSignal});
  auto m2 = option(m, 0, "m2", {"s1", "s2", "s3"}, {{1, 1.0}}, {1.0, 1.0, 1.0}, {0, 1, 2});
  m2.applicable_anywhere = false;
  m2.initiation = {{0, 1}, {1, 1}};
  o.agents[0] = {m1, m2};
  return {"fig3-shape", std::move(m), std::move(o), std::nullopt};
}

}  // namespace

Domain gen_toy(std::string_view name) {
  if (name == "coin-coord") return coin_coord();
  if (name == "chain-cooperate") return chain_cooperate();
  if (name == "relay-discount") return relay_discount();
  if (name == "fig3-shape") return fig3_shape();
  throw std::invalid_argument("unknown toy domain '" + std::string(name) + "'");
}

std::vector<std::string> toy_names() { return {"coin-coord", "chain-cooperate", "relay-discount", "fig3-shape"}; }

}  // namespace macdec
