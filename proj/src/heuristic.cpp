#include "macdec/heuristic.hpp"

#include <algorithm>
#include <stdexcept>

namespace macdec {

RandomOptionHeuristic::RandomOptionHeuristic(const ModelSpec& model, const OptionSet& options)
    : model_(model), options_(options) {
  const std::size_t n = model.num_agents();
  option_.assign(n, 0);
  pending_.assign(n, 0);
  actions_.assign(n, 0);
}

std::size_t RandomOptionHeuristic::pick(const std::vector<std::size_t>& choices, Rng& rng) const {
  auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(choices.size()));
  return choices[std::min(k, choices.size() - 1)];
}

void RandomOptionHeuristic::begin_episode(Rng& rng) {
  for (std::size_t i = 0; i < option_.size(); ++i) {
    auto roots = root_options(options_, i);
    if (roots.empty()) throw std::logic_error("agent has no root-applicable option");
    option_[i] = pick(roots, rng);
    pending_[i] = start_symbol(model_, i);
  }
}

std::size_t RandomOptionHeuristic::joint_action(int, std::size_t, Rng& rng) {
  for (std::size_t i = 0; i < option_.size(); ++i)
    actions_[i] = sample(options_.agents[i][option_[i]].policy[pending_[i]], rng);
  return model_.encode_action(actions_);
}

void RandomOptionHeuristic::observe(std::size_t joint_observation, Rng& rng) {
  for (std::size_t i = 0; i < option_.size(); ++i) {
    const std::size_t o = model_.observation_part(joint_observation, i);
    const auto& spec = options_.agents[i][option_[i]];
    pending_[i] = o;
    if (!bernoulli(rng, spec.termination[o])) continue;
    auto next = successors(options_, i, option_[i], spec.signal_of[o]);
    if (next.empty()) next = root_options(options_, i);
    option_[i] = pick(next, rng);
  }
}

std::size_t generate_state(const ModelSpec& model, HeuristicPolicy& heuristic, int depth, std::uint64_t seed) {
  Rng rng(seed);
  SparseDist b0;
  for (std::size_t s = 0; s < model.num_states(); ++s)
    if (model.initial_belief()[s] > 0.0) b0.push_back({s, model.initial_belief()[s]});
  std::size_t state = sample(b0, rng);
  if (depth <= 0) return state;
  heuristic.begin_episode(rng);
  for (int t = 0; t < depth; ++t) {
    const std::size_t a = heuristic.joint_action(t, state, rng);
    const std::size_t next = sample(model.transition(state, a), rng);
    heuristic.observe(sample(model.observe(a, next), rng), rng);
    state = next;
  }
  return state;
}

HeuristicRegistry::HeuristicRegistry() {
  add("random-options", [](const ModelSpec& m, const OptionSet& o) {
    return std::make_unique<RandomOptionHeuristic>(m, o);
  });
}

void HeuristicRegistry::add(const std::string& name, HeuristicFactory factory) {
  factories_[name] = std::move(factory);
}

std::unique_ptr<HeuristicPolicy> HeuristicRegistry::make(const std::string& name, const ModelSpec& model,
                                                         const OptionSet& options) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) throw std::invalid_argument("unknown heuristic '" + name + "'");
  return it->second(model, options);
}

std::vector<std::string> HeuristicRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

}  // namespace macdec
