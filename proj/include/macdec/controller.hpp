#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "macdec/model.hpp"
#include "macdec/options.hpp"
#include "macdec/policy.hpp"
#include "macdec/rng.hpp"

namespace macdec {

/// Executable form of one agent's tree: a cursor plus the pending symbol.
/// It sees only its own observations.
class AgentController {
 public:
  struct Update {
    std::size_t option;  // option that was running during the step
    bool terminated = false;
    std::size_t signal = kNoSignal;
    bool fell_off = false;
  };

  AgentController(const ModelSpec& model, const OptionSet& options, std::size_t agent,
                  std::shared_ptr<const FlatTree> tree);

  void reset();
  std::size_t act(Rng& rng) const;
  /// Feeds the agent's observation after a step. Termination on a missing
  /// child keeps the current node; it counts as a fall-off unless `last_step`.
  Update observe(std::size_t observation, bool last_step, Rng& rng);

  std::size_t agent() const { return agent_; }
  std::size_t node() const { return node_; }
  std::size_t option() const { return tree_->option[node_]; }
  std::size_t pending() const { return pending_; }

 private:
  const OptionSet* options_;
  std::size_t agent_;
  std::size_t start_;
  std::shared_ptr<const FlatTree> tree_;
  std::size_t node_ = 0;
  std::size_t pending_ = 0;
};

struct AgentStep {
  std::size_t option;
  std::size_t action;
  std::size_t observation;
  bool terminated;
  std::size_t signal;
  bool fell_off;
};

struct TraceStep {
  int t;
  std::size_t state;
  std::size_t joint_action;
  std::size_t next_state;
  std::size_t joint_observation;
  double reward;
  std::vector<AgentStep> agents;
};

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::size_t episode = 0;
  std::vector<TraceStep> steps;
  double ret = 0.0;
  bool fell_off = false;
};

/// Per-episode random streams: one for the environment, one per agent.
struct EpisodeStreams {
  Rng env;
  std::vector<Rng> agents;
  static EpisodeStreams derive(std::uint64_t seed, std::size_t episode, std::size_t num_agents);
};

/// Runs `h` primitive steps from a b0 sample. Each agent chooses from its own
/// controller and stream only. Fills `trace` when given.
EpisodeTrace simulate_episode(const ModelSpec& model, std::vector<AgentController>& controllers, int h,
                              EpisodeStreams& streams, bool record);

std::vector<AgentController> make_controllers(const ModelSpec& model, const OptionSet& options,
                                              const JointPolicy& policy);

/// Seeded episode `episode` of a run with base `seed`.
EpisodeTrace run_seeded_episode(const ModelSpec& model, std::vector<AgentController>& controllers, int h,
                                std::uint64_t seed, std::size_t episode, bool record);

}  // namespace macdec
