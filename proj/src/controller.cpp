#include "macdec/controller.hpp"

namespace macdec {

AgentController::AgentController(const ModelSpec& model, const OptionSet& options, std::size_t agent,
                                 std::shared_ptr<const FlatTree> tree)
    : options_(&options), agent_(agent), start_(start_symbol(model, agent)), tree_(std::move(tree)) {
  if (!tree_ || tree_->size() == 0) throw PolicyError("controller needs a nonempty tree");
  reset();
}

void AgentController::reset() {
  node_ = 0;
  pending_ = start_;
}

std::size_t AgentController::act(Rng& rng) const {
  return sample(options_->agents[agent_][tree_->option[node_]].policy[pending_], rng);
}

AgentController::Update AgentController::observe(std::size_t observation, bool last_step, Rng& rng) {
  const auto& spec = options_->agents[agent_][tree_->option[node_]];
  Update u{tree_->option[node_]};
  pending_ = observation;
  if (!bernoulli(rng, spec.termination[observation])) return u;
  u.terminated = true;
  u.signal = spec.signal_of[observation];
  auto next = tree_->child[node_][u.signal];
  if (next == FlatTree::kNone)
    u.fell_off = !last_step;
  else
    node_ = next;
  return u;
}

EpisodeStreams EpisodeStreams::derive(std::uint64_t seed, std::size_t episode, std::size_t num_agents) {
  EpisodeStreams s{Rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Environment), episode})), {}};
  for (std::size_t i = 0; i < num_agents; ++i)
    s.agents.emplace_back(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Agent), episode, i}));
  return s;
}

EpisodeTrace simulate_episode(const ModelSpec& model, std::vector<AgentController>& controllers, int h,
                              EpisodeStreams& streams, bool record) {
  const std::size_t n = controllers.size();
  SparseDist b0;
  for (std::size_t s = 0; s < model.num_states(); ++s)
    if (model.initial_belief()[s] > 0.0) b0.push_back({s, model.initial_belief()[s]});

  EpisodeTrace trace;
  for (auto& c : controllers) c.reset();
  std::size_t state = sample(b0, streams.env);
  std::vector<std::size_t> actions(n);
  double disc = 1.0;
  for (int t = 0; t < h; ++t) {
    for (std::size_t i = 0; i < n; ++i) actions[i] = controllers[i].act(streams.agents[i]);
    const std::size_t a = model.encode_action(actions);
    const double r = model.reward(state, a);
    trace.ret += r * disc;
    disc *= model.discount();
    const std::size_t next = sample(model.transition(state, a), streams.env);
    const std::size_t o = sample(model.observe(a, next), streams.env);
    TraceStep step{t, state, a, next, o, r, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t oi = model.observation_part(o, i);
      auto u = controllers[i].observe(oi, t == h - 1, streams.agents[i]);
      trace.fell_off = trace.fell_off || u.fell_off;
      if (record) step.agents.push_back({u.option, actions[i], oi, u.terminated, u.signal, u.fell_off});
    }
    if (record) trace.steps.push_back(std::move(step));
    state = next;
  }
  return trace;
}

std::vector<AgentController> make_controllers(const ModelSpec& model, const OptionSet& options,
                                              const JointPolicy& policy) {
  if (policy.size() != model.num_agents() || options.num_agents() != model.num_agents())
    throw PolicyError("policy, options and model disagree on the number of agents");
  std::vector<AgentController> out;
  for (std::size_t i = 0; i < policy.size(); ++i)
    out.emplace_back(model, options, i, std::make_shared<const FlatTree>(flatten(policy[i])));
  return out;
}

EpisodeTrace run_seeded_episode(const ModelSpec& model, std::vector<AgentController>& controllers, int h,
                                std::uint64_t seed, std::size_t episode, bool record) {
  auto streams = EpisodeStreams::derive(seed, episode, controllers.size());
  auto trace = simulate_episode(model, controllers, h, streams, record);
  trace.seed = seed;
  trace.episode = episode;
  return trace;
}

}  // namespace macdec
