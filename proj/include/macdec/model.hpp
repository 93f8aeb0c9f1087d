#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macdec/error.hpp"

namespace macdec {

inline constexpr double kProbTolerance = 1e-9;

/// Sparse distribution entry: outcome index and its probability.
struct Entry {
  std::size_t index;
  double prob;
  bool operator==(const Entry&) const = default;
};

/// Entries are kept sorted by index with no duplicates.
using SparseDist = std::vector<Entry>;

/// One index per agent, in agent order.
struct JointAction {
  std::vector<std::size_t> parts;
  bool operator==(const JointAction&) const = default;
};

struct JointObservation {
  std::vector<std::size_t> parts;
  bool operator==(const JointObservation&) const = default;
};

/// Tabular Dec-POMDP. Joint actions and joint observations are encoded in
/// mixed radix with agent 0 most significant.
///
/// Transition rows are indexed by (state, joint action); observation rows by
/// (joint action, next state). Both are stored sparsely since the generated
/// warehouse models are far too large for dense S x A x S tables.
class ModelSpec {
 public:
  ModelSpec() = default;
  ModelSpec(std::vector<std::string> states, std::vector<std::vector<std::string>> actions,
            std::vector<std::vector<std::string>> observations);

  std::size_t num_agents() const { return action_names_.size(); }
  std::size_t num_states() const { return state_names_.size(); }
  std::size_t num_actions(std::size_t agent) const { return action_names_.at(agent).size(); }
  std::size_t num_observations(std::size_t agent) const { return observation_names_.at(agent).size(); }
  std::size_t num_joint_actions() const { return num_joint_actions_; }
  std::size_t num_joint_observations() const { return num_joint_observations_; }

  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& action_names(std::size_t agent) const { return action_names_.at(agent); }
  const std::vector<std::string>& observation_names(std::size_t agent) const {
    return observation_names_.at(agent);
  }

  std::size_t encode_action(std::span<const std::size_t> parts) const;
  std::size_t encode_action(const JointAction& a) const { return encode_action(a.parts); }
  JointAction decode_action(std::size_t joint) const;
  /// Space-separated per-agent action names.
  std::string joint_action_label(std::size_t joint) const;
  std::string joint_observation_label(std::size_t joint) const;
  std::size_t action_part(std::size_t joint, std::size_t agent) const {
    return (joint / action_stride_[agent]) % action_names_[agent].size();
  }
  std::size_t action_stride(std::size_t agent) const { return action_stride_[agent]; }

  std::size_t encode_observation(std::span<const std::size_t> parts) const;
  std::size_t encode_observation(const JointObservation& o) const { return encode_observation(o.parts); }
  JointObservation decode_observation(std::size_t joint) const;
  std::size_t observation_part(std::size_t joint, std::size_t agent) const {
    return (joint / observation_stride_[agent]) % observation_names_[agent].size();
  }

  /// Row T(s, a, .). Throws std::out_of_range on bad indices.
  const SparseDist& transition(std::size_t state, std::size_t joint_action) const;
  /// Row O(., a, s').
  const SparseDist& observe(std::size_t joint_action, std::size_t next_state) const;
  double reward(std::size_t state, std::size_t joint_action) const;

  void set_transition(std::size_t state, std::size_t joint_action, SparseDist row);
  void set_observation(std::size_t joint_action, std::size_t next_state, SparseDist row);
  void set_reward(std::size_t state, std::size_t joint_action, double value);

  const std::vector<double>& initial_belief() const { return initial_belief_; }
  void set_initial_belief(std::vector<double> b0) { initial_belief_ = std::move(b0); }

  /// nullopt means infinite horizon.
  std::optional<int> horizon() const { return horizon_; }
  void set_horizon(std::optional<int> h) { horizon_ = h; }
  double discount() const { return discount_; }
  void set_discount(double gamma) { discount_ = gamma; }

  /// max |R(s, a)|
  double max_abs_reward() const;

  std::optional<std::size_t> find_state(std::string_view name) const;
  std::optional<std::size_t> find_action(std::size_t agent, std::string_view name) const;
  std::optional<std::size_t> find_observation(std::size_t agent, std::string_view name) const;

  bool operator==(const ModelSpec&) const = default;

 private:
  void check_state(std::size_t s) const;
  void check_joint_action(std::size_t a) const;

  std::vector<std::string> state_names_;
  std::vector<std::vector<std::string>> action_names_;
  std::vector<std::vector<std::string>> observation_names_;
  std::vector<std::size_t> action_stride_;
  std::vector<std::size_t> observation_stride_;
  std::size_t num_joint_actions_ = 0;
  std::size_t num_joint_observations_ = 0;
  std::vector<double> initial_belief_;
  std::vector<SparseDist> transitions_;   // [s * A + a]
  std::vector<SparseDist> observations_;  // [a * S + s']
  std::vector<double> rewards_;           // [s * A + a]
  std::optional<int> horizon_ = 1;
  double discount_ = 1.0;
};

/// Empty iff every ModelSpec invariant holds.
std::vector<Violation> validate(const ModelSpec& model);

/// Normalizes a list of (index, prob) pairs into a SparseDist: sorts, merges
/// duplicates and drops exact zeros.
SparseDist make_dist(std::vector<Entry> entries);

}  // namespace macdec
