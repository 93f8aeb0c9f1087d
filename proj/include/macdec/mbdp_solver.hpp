#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "macdec/dp_solver.hpp"
#include "macdec/heuristic.hpp"

namespace macdec {

struct RetentionConfig {
  std::size_t max_trees = 3;  // 0 disables retention (plain exhaustive backups)
  std::uint64_t seed = 0;
  std::string heuristic = "random-options";
  /// Draws per sampled state; a draw where every joint combination has the
  /// same value is replaced by the next one. 1 keeps the first draw.
  std::size_t redraws = 8;
  /// Independent runs (the first with `seed`); the best value at b0 wins.
  std::size_t restarts = 1;
};

struct StateWinner {
  std::size_t state = 0;
  std::vector<std::size_t> tuple;  // per agent, into the candidate lists
  double value = 0.0;
};

struct Selection {
  TreeSet retained;
  std::vector<std::vector<std::size_t>> kept;  // per agent, candidate indices retained
  std::vector<StateWinner> winners;
  /// Best joint value any combination containing the candidate reached.
  std::vector<std::vector<double>> best_value;
  std::size_t evaluated = 0;
};

/// For each sampled state, evaluates every joint combination from that state
/// over `h_eval` steps and keeps the first maximizing tuple. Per agent, the
/// union of kept trees in sampled-state order, at most `max_trees` of them.
/// Slots left free by repeated winners go to the candidates with the highest
/// value over all sampled states.
Selection select_trees(const ModelSpec& model, const OptionSet& options, const TreeSet& candidates,
                       const std::vector<std::size_t>& states, std::size_t max_trees, int h_eval, std::size_t cap);

struct MbdpIteration {
  IterationStats stats;
  int sample_depth = 0;
  std::vector<StateWinner> winners;
  /// Per-agent analytic bound |M_i| * max_trees^(max signals); empty when retention is off.
  std::vector<std::size_t> candidate_bound;
  std::vector<std::size_t> draws;    // per sampled state
  std::vector<std::size_t> repairs;  // per agent, trees swapped in to keep a root tree buildable
  bool final_selection = false;
};

struct MbdpResult : SolveResult {
  std::vector<MbdpIteration> details;
};

/// |M_i| * max_trees^(max signal count over the agent's options), saturating.
std::size_t candidate_bound(const OptionSet& options, std::size_t agent, std::size_t max_trees);

MbdpResult solve_ombdp(const ModelSpec& model, const OptionSet& options, int h, const RetentionConfig& cfg,
                       HeuristicPolicy& heuristic, const Caps& caps = {}, const ProgressHook& progress = {});

/// Same, with the heuristic named in `cfg` from the default registry.
MbdpResult solve_ombdp(const ModelSpec& model, const OptionSet& options, int h, const RetentionConfig& cfg,
                       const Caps& caps = {}, const ProgressHook& progress = {});

}  // namespace macdec
