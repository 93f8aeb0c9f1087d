#include "macdec/model.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

namespace macdec {

namespace {

std::size_t product_of_sizes(const std::vector<std::vector<std::string>>& sets) {
  std::size_t n = 1;
  for (const auto& s : sets) {
    if (s.empty()) throw std::invalid_argument("every agent needs at least one symbol");
    if (n > (std::size_t{1} << 40) / s.size()) throw std::invalid_argument("joint space too large");
    n *= s.size();
  }
  return n;
}

std::vector<std::size_t> strides(const std::vector<std::vector<std::string>>& sets) {
  std::vector<std::size_t> out(sets.size(), 1);
  for (std::size_t i = sets.size(); i-- > 1;) out[i - 1] = out[i] * sets[i].size();
  return out;
}

template <class Names>
std::optional<std::size_t> find_name(const Names& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

ModelSpec::ModelSpec(std::vector<std::string> states, std::vector<std::vector<std::string>> actions,
                     std::vector<std::vector<std::string>> observations)
    : state_names_(std::move(states)),
      action_names_(std::move(actions)),
      observation_names_(std::move(observations)) {
  if (state_names_.empty()) throw std::invalid_argument("model needs at least one state");
  if (action_names_.empty()) throw std::invalid_argument("model needs at least one agent");
  if (action_names_.size() != observation_names_.size())
    throw std::invalid_argument("action and observation sets disagree on agent count");
  num_joint_actions_ = product_of_sizes(action_names_);
  num_joint_observations_ = product_of_sizes(observation_names_);
  action_stride_ = strides(action_names_);
  observation_stride_ = strides(observation_names_);
  const std::size_t S = state_names_.size();
  transitions_.assign(S * num_joint_actions_, {});
  observations_.assign(num_joint_actions_ * S, {});
  rewards_.assign(S * num_joint_actions_, 0.0);
  initial_belief_.assign(S, 0.0);
  initial_belief_[0] = 1.0;
}

std::size_t ModelSpec::encode_action(std::span<const std::size_t> parts) const {
  if (parts.size() != num_agents()) throw std::out_of_range("joint action arity mismatch");
  std::size_t j = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] >= action_names_[i].size()) throw std::out_of_range("action index out of range");
    j += parts[i] * action_stride_[i];
  }
  return j;
}

JointAction ModelSpec::decode_action(std::size_t joint) const {
  check_joint_action(joint);
  JointAction a;
  for (std::size_t i = 0; i < num_agents(); ++i) a.parts.push_back(action_part(joint, i));
  return a;
}

std::string ModelSpec::joint_action_label(std::size_t joint) const {
  check_joint_action(joint);
  std::string out;
  for (std::size_t i = 0; i < num_agents(); ++i) {
    if (i) out += ' ';
    out += action_names_[i][action_part(joint, i)];
  }
  return out;
}

std::string ModelSpec::joint_observation_label(std::size_t joint) const {
  if (joint >= num_joint_observations_) throw std::out_of_range("joint observation out of range");
  std::string out;
  for (std::size_t i = 0; i < num_agents(); ++i) {
    if (i) out += ' ';
    out += observation_names_[i][observation_part(joint, i)];
  }
  return out;
}

std::size_t ModelSpec::encode_observation(std::span<const std::size_t> parts) const {
  if (parts.size() != num_agents()) throw std::out_of_range("joint observation arity mismatch");
  std::size_t j = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] >= observation_names_[i].size()) throw std::out_of_range("observation index out of range");
    j += parts[i] * observation_stride_[i];
  }
  return j;
}

JointObservation ModelSpec::decode_observation(std::size_t joint) const {
  if (joint >= num_joint_observations_) throw std::out_of_range("joint observation out of range");
  JointObservation o;
  for (std::size_t i = 0; i < num_agents(); ++i) o.parts.push_back(observation_part(joint, i));
  return o;
}

void ModelSpec::check_state(std::size_t s) const {
  if (s >= num_states()) throw std::out_of_range(fmt::format("state {} out of range", s));
}

void ModelSpec::check_joint_action(std::size_t a) const {
  if (a >= num_joint_actions_) throw std::out_of_range(fmt::format("joint action {} out of range", a));
}

const SparseDist& ModelSpec::transition(std::size_t state, std::size_t joint_action) const {
  check_state(state);
  check_joint_action(joint_action);
  return transitions_[state * num_joint_actions_ + joint_action];
}

const SparseDist& ModelSpec::observe(std::size_t joint_action, std::size_t next_state) const {
  check_state(next_state);
  check_joint_action(joint_action);
  return observations_[joint_action * num_states() + next_state];
}

double ModelSpec::reward(std::size_t state, std::size_t joint_action) const {
  check_state(state);
  check_joint_action(joint_action);
  return rewards_[state * num_joint_actions_ + joint_action];
}

void ModelSpec::set_transition(std::size_t state, std::size_t joint_action, SparseDist row) {
  check_state(state);
  check_joint_action(joint_action);
  for (const auto& e : row) check_state(e.index);
  transitions_[state * num_joint_actions_ + joint_action] = std::move(row);
}

void ModelSpec::set_observation(std::size_t joint_action, std::size_t next_state, SparseDist row) {
  check_state(next_state);
  check_joint_action(joint_action);
  for (const auto& e : row)
    if (e.index >= num_joint_observations_) throw std::out_of_range("joint observation out of range");
  observations_[joint_action * num_states() + next_state] = std::move(row);
}

void ModelSpec::set_reward(std::size_t state, std::size_t joint_action, double value) {
  check_state(state);
  check_joint_action(joint_action);
  rewards_[state * num_joint_actions_ + joint_action] = value;
}

double ModelSpec::max_abs_reward() const {
  double m = 0.0;
  for (double r : rewards_) m = std::max(m, std::abs(r));
  return m;
}

std::optional<std::size_t> ModelSpec::find_state(std::string_view name) const {
  return find_name(state_names_, name);
}

std::optional<std::size_t> ModelSpec::find_action(std::size_t agent, std::string_view name) const {
  return find_name(action_names_.at(agent), name);
}

std::optional<std::size_t> ModelSpec::find_observation(std::size_t agent, std::string_view name) const {
  return find_name(observation_names_.at(agent), name);
}

SparseDist make_dist(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });
  SparseDist out;
  for (const auto& e : entries) {
    if (!out.empty() && out.back().index == e.index)
      out.back().prob += e.prob;
    else
      out.push_back(e);
  }
  std::erase_if(out, [](const Entry& e) { return e.prob == 0.0; });
  return out;
}

namespace {

void check_row(const SparseDist& row, const std::string& where, std::vector<Violation>& out) {
  double sum = 0.0;
  for (const auto& e : row) {
    if (e.prob < 0.0 || !std::isfinite(e.prob))
      out.push_back({fmt::format("{} entry {}", where, e.index), "negative or non-finite probability", e.prob});
    sum += e.prob;
  }
  if (std::abs(sum - 1.0) > kProbTolerance)
    out.push_back({where, "row does not sum to 1", sum - 1.0});
}

}  // namespace

std::vector<Violation> validate(const ModelSpec& model) {
  std::vector<Violation> out;
  if (model.num_agents() == 0) {
    out.push_back({"agents", "model has no agents"});
    return out;
  }
  const auto& b0 = model.initial_belief();
  if (b0.size() != model.num_states()) {
    out.push_back({"b0", "initial belief has wrong length", double(b0.size()) - double(model.num_states())});
  } else {
    double sum = 0.0;
    for (std::size_t s = 0; s < b0.size(); ++s) {
      if (b0[s] < 0.0 || !std::isfinite(b0[s]))
        out.push_back({fmt::format("b0[{}]", model.state_names()[s]), "negative or non-finite probability", b0[s]});
      sum += b0[s];
    }
    if (std::abs(sum - 1.0) > kProbTolerance) out.push_back({"b0", "initial belief does not sum to 1", sum - 1.0});
  }

  const double gamma = model.discount();
  if (!(gamma > 0.0 && gamma <= 1.0))
    out.push_back({"discount", "discount must lie in (0, 1]", gamma});
  else if (gamma == 1.0 && !model.horizon())
    out.push_back({"discount", "discount 1 requires a finite horizon", gamma});
  if (model.horizon() && *model.horizon() <= 0)
    out.push_back({"horizon", "horizon must be positive", double(*model.horizon())});

  for (std::size_t s = 0; s < model.num_states(); ++s)
    for (std::size_t a = 0; a < model.num_joint_actions(); ++a)
      check_row(model.transition(s, a), fmt::format("T(s={}, a={})", model.state_names()[s], model.joint_action_label(a)), out);
  for (std::size_t a = 0; a < model.num_joint_actions(); ++a)
    for (std::size_t s = 0; s < model.num_states(); ++s)
      check_row(model.observe(a, s), fmt::format("O(a={}, s'={})", model.joint_action_label(a), model.state_names()[s]), out);
  return out;
}

}  // namespace macdec
