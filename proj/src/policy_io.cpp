#include "macdec/policy_io.hpp"

#include <fmt/format.h>

namespace macdec {

using json = nlohmann::ordered_json;

NamedTree to_named(const OptionSet& options, std::size_t agent, const Tree& tree) {
  const auto& spec = options.at(agent, tree->option());
  NamedTree out{spec.name, {}};
  for (std::size_t s = 0; s < spec.signals.size(); ++s)
    if (const auto& c = tree->children()[s]) out.children.emplace_back(spec.signals[s], to_named(options, agent, c));
  return out;
}

Tree from_named(const OptionSet& options, std::size_t agent, const NamedTree& named) {
  if (agent >= options.num_agents()) throw PolicyError(fmt::format("no agent {}", agent));
  auto m = options.find(agent, named.option);
  if (!m) throw PolicyError(fmt::format("agent {} has no option '{}'", agent, named.option));
  const auto& spec = options.at(agent, *m);
  std::map<std::size_t, Tree> children;
  for (const auto& [label, child] : named.children) {
    auto s = find_signal(spec, label);
    if (!s) throw PolicyError(fmt::format("option '{}' has no signal '{}'", spec.name, label));
    if (children.count(*s)) throw PolicyError(fmt::format("signal '{}' of '{}' given twice", label, spec.name));
    children[*s] = from_named(options, agent, child);
  }
  return attach(options, agent, *m, children);
}

json named_to_json(const NamedTree& tree) {
  json j;
  j["option"] = tree.option;
  if (!tree.children.empty()) {
    json c = json::object();
    for (const auto& [label, child] : tree.children) c[label] = named_to_json(child);
    j["children"] = std::move(c);
  }
  return j;
}

NamedTree named_from_json(const json& j) {
  if (!j.is_object() || !j.contains("option") || !j["option"].is_string())
    throw PolicyError("policy node needs a string 'option'");
  NamedTree out{j["option"].get<std::string>(), {}};
  if (j.contains("children")) {
    const auto& c = j["children"];
    if (!c.is_object()) throw PolicyError("'children' must be an object");
    for (const auto& [label, child] : c.items()) out.children.emplace_back(label, named_from_json(child));
  }
  return out;
}

json policy_to_json(const OptionSet& options, const JointPolicy& policy) {
  json agents = json::array();
  for (std::size_t i = 0; i < policy.size(); ++i) agents.push_back(named_to_json(to_named(options, i, policy[i])));
  json j;
  j["agents"] = std::move(agents);
  return j;
}

std::vector<NamedTree> named_policy_from_json(const json& j) {
  if (!j.is_object() || !j.contains("agents") || !j["agents"].is_array())
    throw PolicyError("policy needs an 'agents' array");
  std::vector<NamedTree> out;
  for (const auto& a : j["agents"]) out.push_back(named_from_json(a));
  return out;
}

JointPolicy policy_from_json(const OptionSet& options, const json& j) {
  auto named = named_policy_from_json(j);
  if (named.size() != options.num_agents())
    throw PolicyError(fmt::format("policy has {} trees for {} agents", named.size(), options.num_agents()));
  JointPolicy out;
  for (std::size_t i = 0; i < named.size(); ++i) out.push_back(from_named(options, i, named[i]));
  auto violations = validate_policy(options, out);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return out;
}

std::string emit_policy(const OptionSet& options, const JointPolicy& policy) {
  return policy_to_json(options, policy).dump(2) + "\n";
}

JointPolicy parse_policy(const OptionSet& options, std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PolicyError(std::string("policy JSON: ") + e.what());
  }
  return policy_from_json(options, j);
}

}  // namespace macdec
