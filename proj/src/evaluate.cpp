#include "macdec/evaluate.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

#include "macdec/controller.hpp"

namespace macdec {

namespace {

using Layer = std::vector<std::pair<std::uint64_t, double>>;

struct Instrument {
  bool occupancy = false;
  std::vector<double> depth_mass;
  std::vector<std::vector<double>> occ;
  std::vector<std::vector<char>> visited;
  double falloff = 0.0;
  std::size_t max_layer = 0;
};

void merge(Layer& layer) {
  std::sort(layer.begin(), layer.end());
  std::size_t w = 0;
  for (std::size_t r = 0; r < layer.size(); ++r) {
    if (w > 0 && layer[w - 1].first == layer[r].first)
      layer[w - 1].second += layer[r].second;
    else
      layer[w++] = layer[r];
  }
  layer.resize(w);
}

/// Forward expansion over keys packing (state, per-agent node and pending
/// symbol, fall-off flag) in mixed radix; the flag is the lowest bit.
class Expansion {
 public:
  Expansion(const ModelSpec& model, const OptionSet& options, std::span<const FlatTree* const> trees)
      : model_(model), options_(options), trees_(trees), n_(trees.size()) {
    if (n_ != model.num_agents() || options.num_agents() != model.num_agents())
      throw PolicyError(fmt::format("policy has {} trees, options cover {} agents, model has {}", n_,
                                    options.num_agents(), model.num_agents()));
    symbols_.resize(n_);
    radix_.resize(n_);
    unsigned __int128 total = model.num_states();
    for (std::size_t i = 0; i < n_; ++i) {
      if (!trees[i] || trees[i]->size() == 0) throw PolicyError(fmt::format("agent {} has no tree", i));
      for (std::size_t node = 0; node < trees[i]->size(); ++node)
        if (trees[i]->option[node] >= options.agents[i].size())
          throw PolicyError(fmt::format("agent {} tree uses unknown option {}", i, trees[i]->option[node]));
      symbols_[i] = model.num_observations(i) + 1;
      radix_[i] = trees[i]->size() * symbols_[i];
      total *= radix_[i];
    }
    total *= 2;
    if (total > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("extended state space does not fit in 64-bit keys");
    nodes_.resize(n_);
    pending_.resize(n_);
    action_idx_.resize(n_);
    outs_.resize(n_);
    count_.resize(n_);
    pick_.resize(n_);
  }

  double run(std::size_t start, int h, Instrument* ins) {
    Layer cur{{encode(start, initial_components(), false), 1.0}}, next;
    double value = 0.0;
    double disc = 1.0;
    for (int t = 0; t < h; ++t) {
      if (ins) record(*ins, t, cur);
      const bool last = t == h - 1;
      double step_value = 0.0;
      next.clear();
      for (const auto& [key, p] : cur) step_value += expand(key, p, last, disc, next);
      value += step_value;
      disc *= model_.discount();
      if (!last) {
        merge(next);
        std::swap(cur, next);
      }
    }
    if (ins)
      for (const auto& [key, p] : cur)
        if (key & 1) ins->falloff += p;
    return value;
  }

 private:
  std::vector<std::size_t> initial_components() const {
    std::vector<std::size_t> c(n_);
    for (std::size_t i = 0; i < n_; ++i) c[i] = symbols_[i] - 1;  // node 0, START
    return c;
  }

  std::uint64_t encode(std::size_t state, const std::vector<std::size_t>& comps, bool flag) const {
    std::uint64_t k = state;
    for (std::size_t i = 0; i < n_; ++i) k = k * radix_[i] + comps[i];
    return (k << 1) | (flag ? 1u : 0u);
  }

  std::size_t decode(std::uint64_t key) {
    key >>= 1;
    for (std::size_t i = n_; i-- > 0;) {
      const std::size_t c = key % radix_[i];
      key /= radix_[i];
      nodes_[i] = c / symbols_[i];
      pending_[i] = c % symbols_[i];
    }
    return static_cast<std::size_t>(key);
  }

  void record(Instrument& ins, int t, const Layer& layer) {
    double mass = 0.0;
    ins.max_layer = std::max(ins.max_layer, layer.size());
    for (const auto& [key, p] : layer) {
      mass += p;
      const std::size_t s = decode(key);
      if (ins.occupancy) ins.occ[t][s] += p;
      for (std::size_t i = 0; i < n_; ++i) ins.visited[i][nodes_[i]] = 1;
    }
    ins.depth_mass[t] += mass;
  }

  // Returns the reward contribution of `key`; appends successors unless `last`.
  double expand(std::uint64_t key, double p, bool last, double disc, Layer& out) {
    const bool flag = key & 1;
    const std::size_t s = decode(key);
    const SparseDist* dists[16];
    std::vector<const SparseDist*> big;
    const SparseDist** d = dists;
    if (n_ > 16) {
      big.resize(n_);
      d = big.data();
    }
    for (std::size_t i = 0; i < n_; ++i) {
      d[i] = &options_.agents[i][trees_[i]->option[nodes_[i]]].policy[pending_[i]];
      if (d[i]->empty()) return 0.0;
      action_idx_[i] = 0;
    }
    double value = 0.0;
    while (true) {
      double pa = 1.0;
      std::size_t ja = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        const Entry& e = (*d[i])[action_idx_[i]];
        pa *= e.prob;
        ja += e.index * model_.action_stride(i);
      }
      const double q = p * pa;
      value += q * model_.reward(s, ja) * disc;
      if (!last) successors(s, ja, q, flag, out);
      std::size_t i = n_;
      while (i-- > 0) {
        if (++action_idx_[i] < d[i]->size()) break;
        action_idx_[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1)) break;
    }
    return value;
  }

  void successors(std::size_t s, std::size_t ja, double q, bool flag, Layer& out) {
    auto& outs = outs_;
    auto& count = count_;
    auto& pick = pick_;
    for (const auto& tr : model_.transition(s, ja)) {
      for (const auto& ob : model_.observe(ja, tr.index)) {
        const double q2 = q * tr.prob * ob.prob;
        for (std::size_t i = 0; i < n_; ++i) {
          const std::size_t oi = model_.observation_part(ob.index, i);
          const auto& spec = options_.agents[i][trees_[i]->option[nodes_[i]]];
          const double beta = spec.termination[oi];
          count[i] = 0;
          if (beta < 1.0) outs[i][count[i]++] = {nodes_[i] * symbols_[i] + oi, 1.0 - beta, false};
          if (beta > 0.0) {
            auto c = trees_[i]->child[nodes_[i]][spec.signal_of[oi]];
            if (c == FlatTree::kNone)
              outs[i][count[i]++] = {nodes_[i] * symbols_[i] + oi, beta, true};
            else
              outs[i][count[i]++] = {c * symbols_[i] + oi, beta, false};
          }
          pick[i] = 0;
        }
        while (true) {
          double pr = q2;
          bool fell = flag;
          std::uint64_t k = tr.index;
          for (std::size_t i = 0; i < n_; ++i) {
            const auto& o = outs[i][pick[i]];
            pr *= o.prob;
            fell = fell || o.fell;
            k = k * radix_[i] + o.comp;
          }
          out.emplace_back((k << 1) | (fell ? 1u : 0u), pr);
          std::size_t i = n_;
          while (i-- > 0) {
            if (++pick[i] < count[i]) break;
            pick[i] = 0;
          }
          if (i == static_cast<std::size_t>(-1)) break;
        }
      }
    }
  }

  const ModelSpec& model_;
  const OptionSet& options_;
  std::span<const FlatTree* const> trees_;
  std::size_t n_;
  std::vector<std::size_t> symbols_, radix_;
  std::vector<std::size_t> nodes_, pending_, action_idx_;
  // per agent up to two outcomes: continue, or terminate into the child
  struct Outcome {
    std::size_t comp;
    double prob;
    bool fell;
  };
  std::vector<std::array<Outcome, 2>> outs_;
  std::vector<std::size_t> count_, pick_;
};

void check_horizon(int h) {
  if (h <= 0) throw std::invalid_argument(fmt::format("horizon must be positive, got {}", h));
}

}  // namespace

ValueReport evaluate_exact(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                           const ExactSettings& settings) {
  check_horizon(h);
  if (policy.size() != model.num_agents())
    throw PolicyError(fmt::format("policy has {} trees for {} agents", policy.size(), model.num_agents()));
  std::vector<FlatTree> flats;
  for (const auto& t : policy) {
    if (!t) throw PolicyError("policy has a missing tree");
    flats.push_back(flatten(t));
  }
  std::vector<const FlatTree*> ptrs;
  for (const auto& f : flats) ptrs.push_back(&f);
  Expansion exp(model, options, ptrs);

  ValueReport rep;
  rep.horizon = h;
  rep.depth_mass.assign(h, 0.0);
  if (settings.occupancy) rep.occupancy.assign(h, std::vector<double>(model.num_states(), 0.0));
  for (const auto& f : flats) rep.node_counts.push_back(f.size());
  std::vector<std::vector<char>> visited;
  for (const auto& f : flats) visited.emplace_back(f.size(), 0);

  const auto& b0 = model.initial_belief();
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const double w = b0[s];
    if (w <= 0.0 && !settings.all_start_states) continue;
    Instrument ins;
    ins.occupancy = settings.occupancy && w > 0.0;
    ins.depth_mass.assign(h, 0.0);
    if (ins.occupancy) ins.occ.assign(h, std::vector<double>(model.num_states(), 0.0));
    ins.visited.clear();
    for (const auto& f : flats) ins.visited.emplace_back(f.size(), 0);
    const double v = exp.run(s, h, &ins);
    rep.start_values.emplace_back(s, v);
    if (w <= 0.0) continue;
    rep.value += w * v;
    rep.falloff_mass += w * ins.falloff;
    rep.max_layer = std::max(rep.max_layer, ins.max_layer);
    for (int t = 0; t < h; ++t) {
      rep.depth_mass[t] += w * ins.depth_mass[t];
      rep.max_mass_error = std::max(rep.max_mass_error, std::abs(ins.depth_mass[t] - 1.0));
      if (ins.occupancy)
        for (std::size_t x = 0; x < model.num_states(); ++x) rep.occupancy[t][x] += w * ins.occ[t][x];
    }
    for (std::size_t i = 0; i < flats.size(); ++i)
      for (std::size_t k = 0; k < flats[i].size(); ++k) visited[i][k] |= ins.visited[i][k];
  }
  for (int t = 0; t < h; ++t) rep.max_mass_error = std::max(rep.max_mass_error, std::abs(rep.depth_mass[t] - 1.0));
  for (const auto& v : visited) rep.unreached_nodes.push_back(std::count(v.begin(), v.end(), 0));
  if (!model.horizon() && model.discount() < 1.0)
    rep.truncation_bound = std::pow(model.discount(), h) * model.max_abs_reward() / (1.0 - model.discount());
  return rep;
}

JointEvaluator::JointEvaluator(const ModelSpec& model, const OptionSet& options) : model_(model), options_(options) {}

double JointEvaluator::from_state(std::span<const FlatTree* const> trees, std::size_t state, int h) const {
  check_horizon(h);
  Expansion exp(model_, options_, trees);
  return exp.run(state, h, nullptr);
}

double JointEvaluator::from_b0(std::span<const FlatTree* const> trees, int h) const {
  check_horizon(h);
  Expansion exp(model_, options_, trees);
  const auto& b0 = model_.initial_belief();
  double v = 0.0;
  for (std::size_t s = 0; s < model_.num_states(); ++s)
    if (b0[s] > 0.0) v += b0[s] * exp.run(s, h, nullptr);
  return v;
}

McEstimate summarize(const std::vector<double>& samples) {
  McEstimate est;
  est.samples = samples.size();
  if (samples.empty()) return est;
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) {
    est.mean = *lo;
    return est;
  }
  double sum = 0.0;
  for (double x : samples) sum += x;
  est.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - est.mean) * (x - est.mean);
    est.stderr_ = std::sqrt(ss / static_cast<double>(samples.size() - 1) / static_cast<double>(samples.size()));
  }
  return est;
}

McEstimate evaluate_mc(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                       std::size_t n, std::uint64_t seed) {
  check_horizon(h);
  if (n == 0) throw std::invalid_argument("need at least one sample");
  auto controllers = make_controllers(model, options, policy);
  std::vector<double> returns(n);
  std::size_t falloff = 0;
  for (std::size_t e = 0; e < n; ++e) {
    auto tr = run_seeded_episode(model, controllers, h, seed, e, false);
    returns[e] = tr.ret;
    falloff += tr.fell_off ? 1 : 0;
  }
  auto est = summarize(returns);
  est.falloff_episodes = falloff;
  return est;
}

}  // namespace macdec
