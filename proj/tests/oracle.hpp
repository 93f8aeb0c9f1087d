#pragma once

// Reference implementations used only by the tests. They read the raw model
// and option tables and share no code with the solvers or the evaluator.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <tuple>
#include <vector>

#include "macdec/model.hpp"
#include "macdec/options.hpp"
#include "macdec/policy.hpp"

namespace oracle {

using macdec::ModelSpec;
using macdec::OptionSet;
using macdec::OptionSpec;

struct OTree {
  std::size_t option = 0;
  std::vector<std::shared_ptr<const OTree>> kids;  // one per signal, null past the last level
};
using OTreePtr = std::shared_ptr<const OTree>;

inline bool may_follow(const OptionSpec& next, std::size_t pred, std::size_t signal) {
  if (next.applicable_anywhere) return true;
  for (auto [p, s] : next.initiation)
    if (p == pred && s == signal) return true;
  return false;
}

/// Every complete tree of exactly `depth` levels: each signal of every non-last
/// level has a child whose option may follow it. Roots are unrestricted.
inline std::vector<OTreePtr> all_trees(const OptionSet& options, std::size_t agent, int depth) {
  const auto& opts = options.agents[agent];
  std::vector<OTreePtr> out;
  if (depth <= 1) {
    for (std::size_t m = 0; m < opts.size(); ++m) {
      auto t = std::make_shared<OTree>();
      t->option = m;
      t->kids.assign(opts[m].signals.size(), nullptr);
      out.push_back(t);
    }
    return out;
  }
  const auto below = all_trees(options, agent, depth - 1);
  for (std::size_t m = 0; m < opts.size(); ++m) {
    const std::size_t k = opts[m].signals.size();
    std::vector<std::vector<OTreePtr>> choices(k);
    bool ok = true;
    for (std::size_t s = 0; s < k; ++s) {
      for (const auto& c : below)
        if (may_follow(opts[c->option], m, s)) choices[s].push_back(c);
      if (choices[s].empty()) ok = false;
    }
    if (!ok) continue;
    std::vector<OTreePtr> picked;
    std::function<void(std::size_t)> build = [&](std::size_t s) {
      if (s == k) {
        auto t = std::make_shared<OTree>();
        t->option = m;
        t->kids = picked;
        out.push_back(t);
        return;
      }
      for (const auto& c : choices[s]) {
        picked.push_back(c);
        build(s + 1);
        picked.pop_back();
      }
    };
    build(0);
  }
  return out;
}

inline std::vector<OTreePtr> root_trees(const OptionSet& options, std::size_t agent, int depth) {
  std::vector<OTreePtr> out;
  for (auto& t : all_trees(options, agent, depth))
    if (options.agents[agent][t->option].root_applicable) out.push_back(t);
  return out;
}

inline macdec::Tree to_tree(const OptionSet& options, std::size_t agent, const OTreePtr& t) {
  std::vector<macdec::Tree> kids;
  for (auto& k : t->kids) kids.push_back(k ? to_tree(options, agent, k) : nullptr);
  return macdec::make_node(options, agent, t->option, std::move(kids));
}

/// Expected discounted return over `h` steps by summing over every
/// trajectory: joint actions, next states, joint observations and per-agent
/// termination outcomes. An agent terminating without a child keeps its node.
/// Identical branch points are cached, which changes the cost but not the sum.
class TrajectorySum {
 public:
  TrajectorySum(const ModelSpec& model, const OptionSet& options, std::vector<OTreePtr> roots)
      : m_(model), o_(options), roots_(std::move(roots)) {}

  double value(int h) {
    memo_.clear();
    double v = 0.0;
    std::vector<const OTree*> nodes;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < roots_.size(); ++i) {
      nodes.push_back(roots_[i].get());
      pending.push_back(m_.num_observations(i));
    }
    for (std::size_t s = 0; s < m_.num_states(); ++s)
      if (m_.initial_belief()[s] > 0.0) v += m_.initial_belief()[s] * go(0, h, s, nodes, pending);
    return v;
  }

 private:
  using Key = std::tuple<int, std::size_t, std::vector<const OTree*>, std::vector<std::size_t>>;

  double go(int t, int h, std::size_t s, const std::vector<const OTree*>& nodes,
            const std::vector<std::size_t>& pending) {
    if (t == h) return 0.0;
    Key key{t, s, nodes, pending};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const std::size_t n = nodes.size();
    double total = 0.0;
    std::vector<std::size_t> act(n);
    std::function<void(std::size_t, double)> over_actions = [&](std::size_t i, double pa) {
      if (i == n) {
        const std::size_t a = m_.encode_action(act);
        total += pa * std::pow(m_.discount(), t) * m_.reward(s, a);
        for (const auto& [s2, pt] : m_.transition(s, a)) {
          for (const auto& [jo, po] : m_.observe(a, s2)) {
            const auto obs = m_.decode_observation(jo).parts;
            std::vector<const OTree*> next(n);
            std::function<void(std::size_t, double)> over_term = [&](std::size_t j, double pb) {
              if (pb == 0.0) return;
              if (j == n) {
                total += pa * pt * po * pb * go(t + 1, h, s2, next, obs);
                return;
              }
              const auto& spec = o_.agents[j][nodes[j]->option];
              const double beta = spec.termination[obs[j]];
              next[j] = nodes[j];
              over_term(j + 1, pb * (1.0 - beta));
              if (beta > 0.0) {
                const auto& kid = nodes[j]->kids[spec.signal_of[obs[j]]];
                next[j] = kid ? kid.get() : nodes[j];
                over_term(j + 1, pb * beta);
              }
            };
            over_term(0, 1.0);
          }
        }
        return;
      }
      const auto& spec = o_.agents[i][nodes[i]->option];
      for (const auto& [ai, p] : spec.policy[pending[i]]) {
        act[i] = ai;
        over_actions(i + 1, pa * p);
      }
    };
    over_actions(0, 1.0);
    memo_[key] = total;
    return total;
  }

  const ModelSpec& m_;
  const OptionSet& o_;
  std::vector<OTreePtr> roots_;
  std::map<Key, double> memo_;
};

struct BruteForce {
  double value = -INFINITY;
  std::vector<OTreePtr> best;
  std::size_t joint_count = 0;
};

/// Maximum over all joint root trees of `depth` levels.
inline BruteForce brute_force(const ModelSpec& model, const OptionSet& options, int depth, int h) {
  const std::size_t n = options.num_agents();
  std::vector<std::vector<OTreePtr>> sets;
  for (std::size_t i = 0; i < n; ++i) sets.push_back(root_trees(options, i, depth));
  BruteForce out;
  std::vector<std::size_t> idx(n, 0);
  for (const auto& s : sets)
    if (s.empty()) return out;
  while (true) {
    std::vector<OTreePtr> joint;
    for (std::size_t i = 0; i < n; ++i) joint.push_back(sets[i][idx[i]]);
    const double v = TrajectorySum(model, options, joint).value(h);
    ++out.joint_count;
    if (v > out.value) {
      out.value = v;
      out.best = joint;
    }
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++idx[i] < sets[i].size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

/// States reachable from the support of b0 under any joint action.
inline std::set<std::size_t> reachable_states(const ModelSpec& model) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < model.num_states(); ++s)
    if (model.initial_belief()[s] > 0.0 && seen.insert(s).second) stack.push_back(s);
  while (!stack.empty()) {
    const auto s = stack.back();
    stack.pop_back();
    for (std::size_t a = 0; a < model.num_joint_actions(); ++a)
      for (const auto& e : model.transition(s, a))
        if (e.prob > 0.0 && seen.insert(e.index).second) stack.push_back(e.index);
  }
  return seen;
}

}  // namespace oracle
