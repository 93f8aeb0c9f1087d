#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "macdec/evaluate.hpp"
#include "macdec/model.hpp"
#include "macdec/options.hpp"
#include "macdec/policy.hpp"

namespace macdec {

/// Candidate trees per agent, in construction order.
struct TreeSet {
  std::vector<std::vector<Tree>> agents;
  std::size_t num_agents() const { return agents.size(); }
};

struct Caps {
  std::size_t max_trees = 1'000'000;  // per agent, per backup
  std::size_t max_joint_evaluations = 10'000'000;
};

/// Number of trees exhaustive_backup would build for `agent` (before
/// removing duplicates), saturating at SIZE_MAX.
std::size_t backup_count(const OptionSet& options, const TreeSet& sets, std::size_t agent);

/// Every tree with any option at the root and, below each of its signals, any
/// tree of `sets` whose root may follow that (option, signal). Options with a
/// signal that no tree can follow are skipped. From an empty set this yields a
/// leaf per option. Throws CapExceeded when an agent would exceed `cap`.
TreeSet exhaustive_backup(const OptionSet& options, const TreeSet& sets, std::size_t cap = Caps{}.max_trees);

/// True iff some tree is not guaranteed to span `h` steps.
bool test_policy_sets_length(const TreeSet& sets, int h);

/// Trees whose root option is root-applicable.
std::vector<Tree> root_trees(const OptionSet& options, std::size_t agent, const std::vector<Tree>& trees);

struct IterationStats {
  int iteration = 0;
  std::vector<std::size_t> candidates;  // per agent, after backup
  std::vector<std::size_t> retained;    // per agent, after selection (equals candidates for O-DP)
  std::size_t joint_pending = 0;        // root-applicable joint combinations
  bool some_too_short = true;
};

using ProgressHook = std::function<void(const IterationStats&)>;

struct JointChoice {
  std::vector<std::size_t> index;  // per agent, into the candidate lists
  double value = 0.0;
  std::size_t evaluated = 0;
};

/// Evaluates every joint combination at b0 and keeps the first strict maximum
/// in lexicographic order (agent 0 most significant).
JointChoice best_joint(const ModelSpec& model, const OptionSet& options, const std::vector<std::vector<Tree>>& trees,
                       int h, std::size_t cap);

struct SolveResult {
  JointPolicy policy;
  ValueReport report;
  std::vector<IterationStats> iterations;
  std::size_t joint_evaluations = 0;
  int horizon = 0;
};

/// Backs up until every tree spans `h`, then returns the best root-applicable
/// joint policy at b0.
SolveResult solve_odp(const ModelSpec& model, const OptionSet& options, int h, const Caps& caps = {},
                      const ProgressHook& progress = {});

}  // namespace macdec
