#include "macdec/policy.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace macdec {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

bool PolicyNode::is_leaf() const {
  return std::all_of(children_.begin(), children_.end(), [](const Tree& c) { return !c; });
}

Tree make_node(const OptionSet& options, std::size_t agent, std::size_t option, std::vector<Tree> children) {
  const auto& list = options.agents.at(agent);
  if (option >= list.size()) throw PolicyError(fmt::format("agent {} has no option {}", agent, option));
  const auto& spec = list[option];
  if (children.empty()) children.resize(spec.signals.size());
  if (children.size() != spec.signals.size())
    throw PolicyError(fmt::format("option {} has {} signals, got {} children", spec.name, spec.signals.size(),
                                  children.size()));
  auto node = std::shared_ptr<PolicyNode>(new PolicyNode());
  node->option_ = option;
  std::size_t h = mix(0x51ed27ULL, option);
  int depth = 0;
  int shortest = 0;
  bool any_child = false;
  for (const auto& c : children) {
    h = mix(h, c ? c->hash() : 0x7f4a7c15ULL);
    if (c) {
      depth = std::max(depth, c->depth());
      shortest = any_child ? std::min(shortest, c->guaranteed_steps()) : c->guaranteed_steps();
      any_child = true;
    }
  }
  // a missing child ends that path, so any gap makes the shortest path just this node
  const bool complete = std::all_of(children.begin(), children.end(), [](const Tree& c) { return bool(c); });
  node->children_ = std::move(children);
  node->hash_ = h;
  node->depth_ = 1 + depth;
  node->guaranteed_steps_ = spec.min_duration + (complete ? shortest : 0);
  return node;
}

Tree make_leaf(const OptionSet& options, std::size_t agent, std::size_t option) {
  return make_node(options, agent, option, {});
}

Tree attach(const OptionSet& options, std::size_t agent, std::size_t option, const std::map<std::size_t, Tree>& children) {
  const auto& list = options.agents.at(agent);
  if (option >= list.size()) throw PolicyError(fmt::format("agent {} has no option {}", agent, option));
  const auto& spec = list[option];
  std::vector<Tree> slots(spec.signals.size());
  for (const auto& [signal, child] : children) {
    if (signal >= spec.signals.size())
      throw PolicyError(fmt::format("option {} has no signal {}", spec.name, signal));
    if (!child) continue;
    if (child->option() >= list.size())
      throw PolicyError(fmt::format("agent {} has no option {}", agent, child->option()));
    if (!applicable(list[child->option()], Context::after(option, signal)))
      throw PolicyError(fmt::format("option {} is not applicable after ({}, {})", list[child->option()].name,
                                    spec.name, spec.signals[signal]));
    slots[signal] = child;
  }
  return make_node(options, agent, option, std::move(slots));
}

bool structurally_equal(const Tree& a, const Tree& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->hash() != b->hash() || a->option() != b->option() || a->children().size() != b->children().size())
    return false;
  for (std::size_t k = 0; k < a->children().size(); ++k)
    if (!structurally_equal(a->children()[k], b->children()[k])) return false;
  return true;
}

std::size_t count_nodes(const Tree& tree) {
  std::unordered_set<const PolicyNode*> seen;
  std::function<void(const Tree&)> walk = [&](const Tree& t) {
    if (!t || !seen.insert(t.get()).second) return;
    for (const auto& c : t->children()) walk(c);
  };
  walk(tree);
  return seen.size();
}

namespace {

void check_tree(const OptionSet& options, std::size_t agent, const Tree& t, const std::string& path,
                std::vector<Violation>& out) {
  const auto& list = options.agents[agent];
  if (t->option() >= list.size()) {
    out.push_back({path, fmt::format("option index {} out of range", t->option())});
    return;
  }
  const auto& spec = list[t->option()];
  if (t->children().size() != spec.signals.size()) {
    out.push_back({path, "child count differs from signal count"});
    return;
  }
  for (std::size_t s = 0; s < spec.signals.size(); ++s) {
    const auto& c = t->children()[s];
    if (!c) continue;
    const std::string sub = path + "/" + spec.signals[s];
    if (c->option() < list.size() && !applicable(list[c->option()], Context::after(t->option(), s)))
      out.push_back({sub, fmt::format("option {} not applicable after ({}, {})", list[c->option()].name, spec.name,
                                      spec.signals[s])});
    check_tree(options, agent, c, sub, out);
  }
}

}  // namespace

std::vector<Violation> validate_policy(const OptionSet& options, const JointPolicy& policy) {
  std::vector<Violation> out;
  if (policy.size() != options.num_agents()) {
    out.push_back({"policy", fmt::format("policy has {} trees for {} agents", policy.size(), options.num_agents())});
    return out;
  }
  for (std::size_t i = 0; i < policy.size(); ++i) {
    const std::string where = fmt::format("agent {}", i);
    if (!policy[i]) {
      out.push_back({where, "missing tree"});
      continue;
    }
    check_tree(options, i, policy[i], where, out);
    if (policy[i]->option() < options.agents[i].size() && !options.agents[i][policy[i]->option()].root_applicable)
      out.push_back({where, "root option is not root-applicable"});
  }
  return out;
}

std::string to_string(const OptionSet& options, std::size_t agent, const Tree& tree) {
  if (!tree) return "-";
  const auto& spec = options.at(agent, tree->option());
  std::string out = spec.name;
  if (tree->is_leaf()) return out;
  out += '{';
  for (std::size_t s = 0; s < spec.signals.size(); ++s) {
    if (s) out += ',';
    out += spec.signals[s] + ':' + to_string(options, agent, tree->children()[s]);
  }
  out += '}';
  return out;
}

}  // namespace macdec

namespace macdec {

FlatTree flatten(const Tree& tree) {
  FlatTree out;
  std::unordered_map<const PolicyNode*, std::uint32_t> index;
  std::function<std::uint32_t(const Tree&)> visit = [&](const Tree& t) -> std::uint32_t {
    if (!t) return FlatTree::kNone;
    if (auto it = index.find(t.get()); it != index.end()) return it->second;
    auto id = static_cast<std::uint32_t>(out.option.size());
    index.emplace(t.get(), id);
    out.option.push_back(t->option());
    out.child.emplace_back(t->children().size(), FlatTree::kNone);
    for (std::size_t s = 0; s < t->children().size(); ++s) {
      auto c = visit(t->children()[s]);
      out.child[id][s] = c;
    }
    return id;
  };
  visit(tree);
  return out;
}

}  // namespace macdec
