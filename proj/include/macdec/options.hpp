#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macdec/model.hpp"

namespace macdec {

inline constexpr std::size_t kNoSignal = std::numeric_limits<std::size_t>::max();

/// One agent's macro-action with a reactive internal policy.
///
/// Rows of `policy` are indexed by observation, with the extra row
/// `num_observations(agent)` standing for START. `termination` and `signal_of`
/// are indexed by observation. Options are referred to by their index within
/// the owning agent's list.
struct OptionSpec {
  std::string name;
  std::size_t agent = 0;
  std::vector<std::string> signals;
  std::vector<SparseDist> policy;
  std::vector<double> termination;
  std::vector<std::size_t> signal_of;  // kNoSignal where termination is 0
  bool root_applicable = false;
  bool applicable_anywhere = false;  // any (predecessor, signal) context
  std::vector<std::pair<std::size_t, std::size_t>> initiation;  // (predecessor, signal)
  int min_duration = 1;

  bool operator==(const OptionSpec&) const = default;
};

struct OptionSet {
  std::vector<std::vector<OptionSpec>> agents;

  std::size_t num_agents() const { return agents.size(); }
  const std::vector<std::string>& signals(std::size_t agent, std::size_t option) const {
    return agents.at(agent).at(option).signals;
  }
  const OptionSpec& at(std::size_t agent, std::size_t option) const { return agents.at(agent).at(option); }
  std::optional<std::size_t> find(std::size_t agent, std::string_view name) const;

  bool operator==(const OptionSet&) const = default;
};

/// Where an option would start: episode start, or right after `predecessor`
/// ended with `signal`.
struct Context {
  bool root = true;
  std::size_t predecessor = 0;
  std::size_t signal = 0;

  static Context start() { return {}; }
  static Context after(std::size_t predecessor, std::size_t signal) { return {false, predecessor, signal}; }
};

bool applicable(const OptionSpec& option, Context context);

inline int min_duration_bound(const OptionSpec& option) { return option.min_duration; }

/// Index of the START row in an option policy for `agent`.
inline std::size_t start_symbol(const ModelSpec& model, std::size_t agent) { return model.num_observations(agent); }

/// Options of `agent` that may follow (predecessor, signal), in index order.
std::vector<std::size_t> successors(const OptionSet& options, std::size_t agent, std::size_t predecessor,
                                    std::size_t signal);
std::vector<std::size_t> root_options(const OptionSet& options, std::size_t agent);

std::optional<std::size_t> find_signal(const OptionSpec& option, std::string_view label);

std::vector<Violation> validate_options(const ModelSpec& model, const OptionSet& options);

}  // namespace macdec
