#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "macdec/model.hpp"
#include "macdec/options.hpp"
#include "macdec/policy.hpp"

namespace macdec {

struct ValueReport {
  int horizon = 0;
  double value = 0.0;  // at b0
  /// Value from each start state in the support of b0 (or every state when requested).
  std::vector<std::pair<std::size_t, double>> start_values;
  /// Probability that some agent ran out of tree before the horizon.
  double falloff_mass = 0.0;
  /// Total extended-state mass at each depth, b0-weighted.
  std::vector<double> depth_mass;
  double max_mass_error = 0.0;
  std::vector<std::size_t> node_counts;      // per agent
  std::vector<std::size_t> unreached_nodes;  // per agent
  std::size_t max_layer = 0;                 // largest extended-state layer
  /// Set for infinite-horizon models: bound on the value beyond the horizon.
  std::optional<double> truncation_bound;
  /// occupancy[t][s] at b0, filled when requested.
  std::vector<std::vector<double>> occupancy;
};

struct ExactSettings {
  bool occupancy = false;
  bool all_start_states = false;
};

/// Exact expectation of the discounted return over `h` primitive steps by
/// forward expansion of (state, per-agent node and pending symbol). Throws
/// std::invalid_argument for h <= 0 and PolicyError for arity mismatch.
ValueReport evaluate_exact(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                           const ExactSettings& settings = {});

/// Value-only evaluation over pre-flattened trees, used by the solvers.
class JointEvaluator {
 public:
  JointEvaluator(const ModelSpec& model, const OptionSet& options);

  double from_state(std::span<const FlatTree* const> trees, std::size_t state, int h) const;
  double from_b0(std::span<const FlatTree* const> trees, int h) const;

 private:
  const ModelSpec& model_;
  const OptionSet& options_;
};

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
  std::size_t falloff_episodes = 0;
};

/// Mean discounted return over `n` seeded episodes, run exactly as the
/// executor runs them. Equal samples give stderr exactly 0.
McEstimate evaluate_mc(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                       std::size_t n, std::uint64_t seed);

/// Mean and standard error of a sample; exact mean and zero error when all
/// entries are equal.
McEstimate summarize(const std::vector<double>& samples);

}  // namespace macdec
