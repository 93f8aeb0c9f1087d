#include "macdec/dp_solver.hpp"

#include <fmt/format.h>

#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace macdec {

namespace {

constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();

std::size_t sat_mul(std::size_t a, std::size_t b) {
  std::size_t r;
  return __builtin_mul_overflow(a, b, &r) ? kMax : r;
}

std::size_t sat_add(std::size_t a, std::size_t b) { return a > kMax - b ? kMax : a + b; }

/// follow[m][s] = trees from `prev` that may follow (m, s).
std::vector<std::vector<std::vector<Tree>>> followers(const OptionSet& options, std::size_t agent,
                                                      const std::vector<Tree>& prev) {
  const auto& list = options.agents[agent];
  std::vector<std::vector<std::vector<Tree>>> out(list.size());
  for (std::size_t m = 0; m < list.size(); ++m) {
    out[m].resize(list[m].signals.size());
    for (std::size_t s = 0; s < list[m].signals.size(); ++s)
      for (const auto& t : prev)
        if (applicable(list[t->option()], Context::after(m, s))) out[m][s].push_back(t);
  }
  return out;
}

}  // namespace

std::size_t backup_count(const OptionSet& options, const TreeSet& sets, std::size_t agent) {
  const auto& list = options.agents.at(agent);
  const bool empty = sets.agents.empty() || sets.agents.at(agent).empty();
  if (empty) return list.size();
  auto follow = followers(options, agent, sets.agents[agent]);
  std::size_t total = 0;
  for (std::size_t m = 0; m < list.size(); ++m) {
    std::size_t n = 1;
    for (const auto& f : follow[m]) n = sat_mul(n, f.size());
    total = sat_add(total, n);
  }
  return total;
}

TreeSet exhaustive_backup(const OptionSet& options, const TreeSet& sets, std::size_t cap) {
  TreeSet out;
  out.agents.resize(options.num_agents());
  for (std::size_t i = 0; i < options.num_agents(); ++i) {
    const auto& list = options.agents[i];
    const std::size_t count = backup_count(options, sets, i);
    if (count > cap) throw CapExceeded(fmt::format("backup for agent {}", i), count, cap);
    auto& dst = out.agents[i];
    dst.reserve(count);
    std::unordered_set<Tree, TreeHash, TreeEqual> seen;
    auto push = [&](Tree t) {
      if (seen.insert(t).second) dst.push_back(std::move(t));
    };
    if (sets.agents.empty() || sets.agents[i].empty()) {
      for (std::size_t m = 0; m < list.size(); ++m) push(make_leaf(options, i, m));
      continue;
    }
    auto follow = followers(options, i, sets.agents[i]);
    for (std::size_t m = 0; m < list.size(); ++m) {
      const auto& f = follow[m];
      bool feasible = true;
      for (const auto& choices : f) feasible = feasible && !choices.empty();
      if (!feasible) continue;
      std::vector<std::size_t> pick(f.size(), 0);
      while (true) {
        std::vector<Tree> children(f.size());
        for (std::size_t s = 0; s < f.size(); ++s) children[s] = f[s][pick[s]];
        push(make_node(options, i, m, std::move(children)));
        std::size_t s = f.size();
        while (s-- > 0) {
          if (++pick[s] < f[s].size()) break;
          pick[s] = 0;
        }
        if (s == kMax) break;
      }
    }
  }
  return out;
}

bool test_policy_sets_length(const TreeSet& sets, int h) {
  for (const auto& list : sets.agents)
    for (const auto& t : list)
      if (t->guaranteed_steps() < h) return true;
  return false;
}

std::vector<Tree> root_trees(const OptionSet& options, std::size_t agent, const std::vector<Tree>& trees) {
  std::vector<Tree> out;
  for (const auto& t : trees)
    if (options.at(agent, t->option()).root_applicable) out.push_back(t);
  return out;
}

JointChoice best_joint(const ModelSpec& model, const OptionSet& options, const std::vector<std::vector<Tree>>& trees,
                       int h, std::size_t cap) {
  const std::size_t n = trees.size();
  std::size_t total = 1;
  for (const auto& t : trees) {
    if (t.empty()) throw SolverError("an agent has no candidate tree");
    total = sat_mul(total, t.size());
  }
  if (total > cap) throw CapExceeded("joint evaluations", total, cap);

  std::vector<std::vector<FlatTree>> flats(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& t : trees[i]) flats[i].push_back(flatten(t));

  std::vector<double> values(total);
  JointEvaluator eval(model, options);
  const auto combo = [&](std::size_t k, std::vector<std::size_t>& idx) {
    for (std::size_t i = n; i-- > 0;) {
      idx[i] = k % trees[i].size();
      k /= trees[i].size();
    }
  };
#pragma omp parallel
  {
    std::vector<std::size_t> idx(n);
    std::vector<const FlatTree*> ptrs(n);
#pragma omp for schedule(dynamic, 16)
    for (std::size_t k = 0; k < total; ++k) {
      combo(k, idx);
      for (std::size_t i = 0; i < n; ++i) ptrs[i] = &flats[i][idx[i]];
      values[k] = eval.from_b0(ptrs, h);
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < total; ++k)
    if (values[k] > values[best]) best = k;
  JointChoice out;
  out.index.resize(n);
  combo(best, out.index);
  out.value = values[best];
  out.evaluated = total;
  return out;
}

SolveResult solve_odp(const ModelSpec& model, const OptionSet& options, int h, const Caps& caps,
                      const ProgressHook& progress) {
  if (h <= 0) throw std::invalid_argument(fmt::format("solver needs a positive finite horizon, got {}", h));
  if (options.num_agents() != model.num_agents()) throw SolverError("options and model disagree on agent count");
  TreeSet sets;
  SolveResult res;
  res.horizon = h;
  bool too_short = true;
  for (int it = 1; too_short; ++it) {
    sets = exhaustive_backup(options, sets, caps.max_trees);
    too_short = test_policy_sets_length(sets, h);
    IterationStats st;
    st.iteration = it;
    std::size_t pending = 1;
    for (std::size_t i = 0; i < sets.num_agents(); ++i) {
      if (sets.agents[i].empty()) throw SolverError(fmt::format("agent {} has no extendable tree", i));
      st.candidates.push_back(sets.agents[i].size());
      pending = sat_mul(pending, root_trees(options, i, sets.agents[i]).size());
    }
    st.retained = st.candidates;
    st.joint_pending = pending;
    st.some_too_short = too_short;
    res.iterations.push_back(st);
    if (progress) progress(st);
  }
  std::vector<std::vector<Tree>> roots;
  for (std::size_t i = 0; i < sets.num_agents(); ++i) roots.push_back(root_trees(options, i, sets.agents[i]));
  auto choice = best_joint(model, options, roots, h, caps.max_joint_evaluations);
  for (std::size_t i = 0; i < roots.size(); ++i) res.policy.push_back(roots[i][choice.index[i]]);
  res.joint_evaluations = choice.evaluated;
  res.report = evaluate_exact(model, options, res.policy, h);
  return res;
}

}  // namespace macdec
