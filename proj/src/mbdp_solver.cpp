#include "macdec/mbdp_solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace macdec {

namespace {

constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
constexpr double kFlatTolerance = 1e-9;

std::size_t sat_mul(std::size_t a, std::size_t b) {
  std::size_t r;
  return __builtin_mul_overflow(a, b, &r) ? kMax : r;
}

/// True when some root option has a follower for each of its signals.
bool root_buildable(const OptionSet& options, std::size_t agent, const std::vector<Tree>& trees) {
  const auto& list = options.agents[agent];
  for (std::size_t m : root_options(options, agent)) {
    bool ok = true;
    for (std::size_t s = 0; ok && s < list[m].signals.size(); ++s)
      ok = std::any_of(trees.begin(), trees.end(),
                       [&](const Tree& t) { return applicable(list[t->option()], Context::after(m, s)); });
    if (ok) return true;
  }
  return false;
}

bool has_root_tree(const OptionSet& options, const TreeSet& sets) {
  for (std::size_t i = 0; i < sets.num_agents(); ++i)
    if (root_trees(options, i, sets.agents[i]).empty()) return false;
  return true;
}

}  // namespace

std::size_t candidate_bound(const OptionSet& options, std::size_t agent, std::size_t max_trees) {
  const auto& list = options.agents.at(agent);
  std::size_t fan = 0;
  for (const auto& o : list) fan = std::max(fan, o.signals.size());
  std::size_t b = list.size();
  for (std::size_t k = 0; k < fan; ++k) b = sat_mul(b, max_trees);
  return b;
}

namespace {

// Values of every joint combination of candidates at a given state.
class JointTable {
 public:
  JointTable(const ModelSpec& model, const OptionSet& options, const TreeSet& candidates, int h_eval)
      : candidates_(candidates), eval_(model, options), h_eval_(h_eval), n_(candidates.num_agents()) {
    for (const auto& c : candidates.agents) {
      if (c.empty()) throw SolverError("select_trees needs at least one candidate per agent");
      combos_ = sat_mul(combos_, c.size());
    }
    flats_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (const auto& t : candidates.agents[i]) flats_[i].push_back(flatten(t));
  }

  std::size_t combos() const { return combos_; }

  void tuple(std::size_t k, std::vector<std::size_t>& idx) const {
    for (std::size_t i = n_; i-- > 0;) {
      idx[i] = k % candidates_.agents[i].size();
      k /= candidates_.agents[i].size();
    }
  }

  std::vector<double> values(std::size_t state) const {
    std::vector<double> v(combos_);
#pragma omp parallel
    {
      std::vector<std::size_t> local(n_);
      std::vector<const FlatTree*> ptrs(n_);
#pragma omp for schedule(dynamic, 16)
      for (std::size_t k = 0; k < combos_; ++k) {
        tuple(k, local);
        for (std::size_t i = 0; i < n_; ++i) ptrs[i] = &flats_[i][local[i]];
        v[k] = eval_.from_state(ptrs, state, h_eval_);
      }
    }
    return v;
  }

 private:
  const TreeSet& candidates_;
  JointEvaluator eval_;
  int h_eval_;
  std::size_t n_;
  std::size_t combos_ = 1;
  std::vector<std::vector<FlatTree>> flats_;
};

void start_selection(Selection& sel, const TreeSet& candidates) {
  sel.best_value.resize(candidates.num_agents());
  for (std::size_t i = 0; i < candidates.num_agents(); ++i)
    sel.best_value[i].assign(candidates.agents[i].size(), -std::numeric_limits<double>::infinity());
}

void add_state(Selection& sel, const JointTable& table, std::size_t state, const std::vector<double>& values) {
  const std::size_t n = sel.best_value.size();
  std::vector<std::size_t> idx(n);
  std::size_t best = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
    table.tuple(k, idx);
    for (std::size_t i = 0; i < n; ++i) sel.best_value[i][idx[i]] = std::max(sel.best_value[i][idx[i]], values[k]);
  }
  table.tuple(best, idx);
  sel.winners.push_back({state, idx, values[best]});
}

void finish_selection(Selection& sel, const TreeSet& candidates, std::size_t max_trees) {
  const std::size_t n = candidates.num_agents();
  sel.retained.agents.resize(n);
  sel.kept.resize(n);
  for (const auto& w : sel.winners)
    for (std::size_t i = 0; i < n; ++i) {
      auto& kept = sel.kept[i];
      if (kept.size() < max_trees && std::find(kept.begin(), kept.end(), w.tuple[i]) == kept.end())
        kept.push_back(w.tuple[i]);
    }
  // repeated winners leave free slots; fill them with the best remaining candidates
  for (std::size_t i = 0; i < n; ++i) {
    auto& kept = sel.kept[i];
    std::vector<std::size_t> order(candidates.agents[i].size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sel.best_value[i][a] > sel.best_value[i][b]; });
    for (auto k : order) {
      if (kept.size() >= max_trees) break;
      if (std::find(kept.begin(), kept.end(), k) == kept.end()) kept.push_back(k);
    }
    for (auto k : kept) sel.retained.agents[i].push_back(candidates.agents[i][k]);
  }
}

}  // namespace

Selection select_trees(const ModelSpec& model, const OptionSet& options, const TreeSet& candidates,
                       const std::vector<std::size_t>& states, std::size_t max_trees, int h_eval, std::size_t cap) {
  JointTable table(model, options, candidates, h_eval);
  const std::size_t total = sat_mul(table.combos(), states.size());
  if (total > cap) throw CapExceeded("joint evaluations in selection", total, cap);
  Selection sel;
  sel.evaluated = total;
  start_selection(sel, candidates);
  for (std::size_t state : states) add_state(sel, table, state, table.values(state));
  finish_selection(sel, candidates, max_trees);
  return sel;
}

namespace {

MbdpResult solve_once(const ModelSpec& model, const OptionSet& options, int h, const RetentionConfig& cfg,
                      HeuristicPolicy& heuristic, const Caps& caps, const ProgressHook& progress) {
  if (h <= 0) throw std::invalid_argument(fmt::format("solver needs a positive finite horizon, got {}", h));
  if (options.num_agents() != model.num_agents()) throw SolverError("options and model disagree on agent count");
  const std::size_t n = model.num_agents();
  MbdpResult res;
  res.horizon = h;
  TreeSet retained;
  // every backup adds at least one step to every tree, so h backups always suffice;
  // the slack covers iterations spent recovering a buildable root
  const int max_iterations = 2 * h + 8;
  for (int t = 0;; ++t) {
    if (t >= max_iterations)
      throw SolverError(fmt::format("no root-applicable joint policy spanning {} steps after {} iterations", h, t));
    TreeSet candidates = exhaustive_backup(options, retained, caps.max_trees);
    MbdpIteration it;
    it.stats.iteration = t + 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (candidates.agents[i].empty()) throw SolverError(fmt::format("agent {} has no extendable tree", i));
      it.stats.candidates.push_back(candidates.agents[i].size());
    }
    it.repairs.assign(n, 0);
    if (cfg.max_trees == 0) {
      retained = std::move(candidates);
    } else {
      for (std::size_t i = 0; i < n; ++i) it.candidate_bound.push_back(candidate_bound(options, i, cfg.max_trees));
      TreeSet pool = candidates;
      it.final_selection = !test_policy_sets_length(candidates, h);
      if (it.final_selection)
        for (std::size_t i = 0; i < n; ++i) {
          auto roots = root_trees(options, i, candidates.agents[i]);
          if (!roots.empty()) pool.agents[i] = std::move(roots);
        }
      it.sample_depth = std::max(0, h - t - 1);
      // a state at which every combination scores the same cannot rank trees; redraw it
      JointTable table(model, options, pool, t + 1);
      const std::size_t per_state = std::max<std::size_t>(table.combos(), 1);
      Selection sel;
      start_selection(sel, pool);
      for (std::size_t k = 0; k < cfg.max_trees; ++k) {
        for (std::size_t attempt = 0;; ++attempt) {
          const auto state = generate_state(
              model, heuristic, it.sample_depth,
              derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Sampling), static_cast<std::uint64_t>(t), k,
                                     attempt}));
          if (sel.evaluated + per_state > caps.max_joint_evaluations)
            throw CapExceeded("joint evaluations in selection", sel.evaluated + per_state, caps.max_joint_evaluations);
          sel.evaluated += per_state;
          auto values = table.values(state);
          const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
          if (*hi - *lo > kFlatTolerance || attempt + 1 >= cfg.redraws) {
            add_state(sel, table, state, values);
            it.draws.push_back(attempt + 1);
            break;
          }
        }
      }
      finish_selection(sel, pool, cfg.max_trees);
      it.winners = sel.winners;
      res.joint_evaluations += sel.evaluated;
      retained = std::move(sel.retained);
      for (std::size_t i = 0; i < n && !it.final_selection; ++i) {
        if (root_buildable(options, i, retained.agents[i])) continue;
        std::vector<std::size_t> order(pool.agents[i].size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return sel.best_value[i][a] > sel.best_value[i][b];
        });
        for (auto k : order) {
          std::vector<Tree> trial{pool.agents[i][k]};
          if (!root_buildable(options, i, trial)) continue;
          auto& r = retained.agents[i];
          if (r.size() < cfg.max_trees)
            r.push_back(pool.agents[i][k]);
          else
            r.back() = pool.agents[i][k];
          ++it.repairs[i];
          break;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) it.stats.retained.push_back(retained.agents[i].size());
    const bool done = !test_policy_sets_length(retained, h) && has_root_tree(options, retained);
    it.stats.some_too_short = !done;
    std::size_t pending = 1;
    for (std::size_t i = 0; i < n; ++i) pending = sat_mul(pending, root_trees(options, i, retained.agents[i]).size());
    it.stats.joint_pending = pending;
    res.iterations.push_back(it.stats);
    res.details.push_back(std::move(it));
    if (progress) progress(res.iterations.back());
    if (done) break;
  }
  std::vector<std::vector<Tree>> roots;
  for (std::size_t i = 0; i < n; ++i) roots.push_back(root_trees(options, i, retained.agents[i]));
  auto choice = best_joint(model, options, roots, h, caps.max_joint_evaluations);
  for (std::size_t i = 0; i < n; ++i) res.policy.push_back(roots[i][choice.index[i]]);
  res.joint_evaluations += choice.evaluated;
  res.report = evaluate_exact(model, options, res.policy, h);
  return res;
}

}  // namespace

MbdpResult solve_ombdp(const ModelSpec& model, const OptionSet& options, int h, const RetentionConfig& cfg,
                       HeuristicPolicy& heuristic, const Caps& caps, const ProgressHook& progress) {
  if (cfg.restarts == 0) throw std::invalid_argument("restarts must be at least 1");
  MbdpResult best = solve_once(model, options, h, cfg, heuristic, caps, progress);
  std::size_t evaluations = best.joint_evaluations;
  for (std::size_t r = 1; r < cfg.restarts; ++r) {
    RetentionConfig next = cfg;
    next.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Restart), r});
    auto res = solve_once(model, options, h, next, heuristic, caps, progress);
    evaluations += res.joint_evaluations;
    if (res.report.value > best.report.value) best = std::move(res);
  }
  best.joint_evaluations = evaluations;
  return best;
}

MbdpResult solve_ombdp(const ModelSpec& model, const OptionSet& options, int h, const RetentionConfig& cfg,
                       const Caps& caps, const ProgressHook& progress) {
  auto heuristic = HeuristicRegistry().make(cfg.heuristic, model, options);
  return solve_ombdp(model, options, h, cfg, *heuristic, caps, progress);
}

}  // namespace macdec
