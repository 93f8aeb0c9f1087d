#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "macdec/model.hpp"
#include "macdec/options.hpp"
#include "macdec/rng.hpp"

namespace macdec {

/// Joint primitive-action rule used to sample states for tree selection.
class HeuristicPolicy {
 public:
  enum class Mode { StateFeedback, Blind };

  virtual ~HeuristicPolicy() = default;
  virtual Mode mode() const = 0;
  virtual std::string name() const = 0;
  virtual void begin_episode(Rng& rng) = 0;
  /// `state` is only meaningful in StateFeedback mode.
  virtual std::size_t joint_action(int step, std::size_t state, Rng& rng) = 0;
  virtual void observe(std::size_t joint_observation, Rng& rng) = 0;
};

/// Picks uniformly among applicable options and runs their internal policies.
class RandomOptionHeuristic : public HeuristicPolicy {
 public:
  RandomOptionHeuristic(const ModelSpec& model, const OptionSet& options);
  Mode mode() const override { return Mode::Blind; }
  std::string name() const override { return "random-options"; }
  void begin_episode(Rng& rng) override;
  std::size_t joint_action(int step, std::size_t state, Rng& rng) override;
  void observe(std::size_t joint_observation, Rng& rng) override;

 private:
  std::size_t pick(const std::vector<std::size_t>& choices, Rng& rng) const;

  const ModelSpec& model_;
  const OptionSet& options_;
  std::vector<std::size_t> option_, pending_, actions_;
};

/// Sample of the state after `depth` heuristic steps from b0.
std::size_t generate_state(const ModelSpec& model, HeuristicPolicy& heuristic, int depth, std::uint64_t seed);

using HeuristicFactory = std::function<std::unique_ptr<HeuristicPolicy>(const ModelSpec&, const OptionSet&)>;

/// Named heuristics; "random-options" is always present.
class HeuristicRegistry {
 public:
  HeuristicRegistry();
  void add(const std::string& name, HeuristicFactory factory);
  std::unique_ptr<HeuristicPolicy> make(const std::string& name, const ModelSpec& model,
                                        const OptionSet& options) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, HeuristicFactory> factories_;
};

}  // namespace macdec
