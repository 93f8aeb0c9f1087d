#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macdec/policy.hpp"
#include <json.hpp>

namespace macdec {

/// A tree spelled with option and signal names, independent of any option
/// file. Children keep signal order.
struct NamedTree {
  std::string option;
  std::vector<std::pair<std::string, NamedTree>> children;
  bool operator==(const NamedTree&) const = default;
};

NamedTree to_named(const OptionSet& options, std::size_t agent, const Tree& tree);
/// Resolves names and checks applicability of every edge (throws PolicyError).
Tree from_named(const OptionSet& options, std::size_t agent, const NamedTree& named);

/// `{"option": name, "children": {signal: node, ...}}`, children omitted at leaves.
nlohmann::ordered_json named_to_json(const NamedTree& tree);
NamedTree named_from_json(const nlohmann::ordered_json& j);

/// `{"agents": [node, ...]}` with one node per agent.
nlohmann::ordered_json policy_to_json(const OptionSet& options, const JointPolicy& policy);
std::vector<NamedTree> named_policy_from_json(const nlohmann::ordered_json& j);
JointPolicy policy_from_json(const OptionSet& options, const nlohmann::ordered_json& j);

std::string emit_policy(const OptionSet& options, const JointPolicy& policy);
/// Parses and validates; throws PolicyError or ValidationError.
JointPolicy parse_policy(const OptionSet& options, std::string_view text);

}  // namespace macdec
