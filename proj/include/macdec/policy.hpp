#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "macdec/options.hpp"

namespace macdec {

class PolicyNode;
/// Trees are immutable and share subtrees, so a tree is a pointer to its root.
using Tree = std::shared_ptr<const PolicyNode>;

class PolicyNode {
 public:
  std::size_t option() const { return option_; }
  /// Child per signal of the node's option; null where the tree ends.
  const std::vector<Tree>& children() const { return children_; }
  const Tree& child(std::size_t signal) const { return children_.at(signal); }
  bool is_leaf() const;
  std::size_t hash() const { return hash_; }
  /// Options on the longest root-to-leaf path.
  int depth() const { return depth_; }
  /// Minimum over root-to-leaf paths of the summed option min durations.
  int guaranteed_steps() const { return guaranteed_steps_; }

 private:
  friend Tree make_node(const OptionSet&, std::size_t, std::size_t, std::vector<Tree>);
  PolicyNode() = default;

  std::size_t option_ = 0;
  std::vector<Tree> children_;
  std::size_t hash_ = 0;
  int depth_ = 1;
  int guaranteed_steps_ = 1;
};

/// Builds a node without initiation checks. Used by the solvers after they
/// have already filtered children by applicability.
Tree make_node(const OptionSet& options, std::size_t agent, std::size_t option, std::vector<Tree> children);

Tree make_leaf(const OptionSet& options, std::size_t agent, std::size_t option);

/// Node `option` with children keyed by signal index. Throws PolicyError when a
/// key is not a signal of `option` or a child's root is not applicable after
/// (option, signal).
Tree attach(const OptionSet& options, std::size_t agent, std::size_t option, const std::map<std::size_t, Tree>& children);

inline int guaranteed_steps(const Tree& tree) { return tree->guaranteed_steps(); }

bool structurally_equal(const Tree& a, const Tree& b);

/// Number of distinct (shared) nodes.
std::size_t count_nodes(const Tree& tree);

/// One tree per agent.
using JointPolicy = std::vector<Tree>;

/// Checks arity, option indices, edge applicability and root applicability.
std::vector<Violation> validate_policy(const OptionSet& options, const JointPolicy& policy);

/// Index-addressed copy of a tree for execution. Node 0 is the root; shared
/// subtrees map to one node.
struct FlatTree {
  static constexpr std::uint32_t kNone = 0xffffffffu;
  std::vector<std::size_t> option;
  std::vector<std::vector<std::uint32_t>> child;  // [node][signal]

  std::size_t size() const { return option.size(); }
};

FlatTree flatten(const Tree& tree);

/// Compact single-line rendering, e.g. `m1{s1:m1,s2:m2}`.
std::string to_string(const OptionSet& options, std::size_t agent, const Tree& tree);

struct TreeHash {
  std::size_t operator()(const Tree& t) const { return t->hash(); }
};
struct TreeEqual {
  bool operator()(const Tree& a, const Tree& b) const { return structurally_equal(a, b); }
};

}  // namespace macdec
