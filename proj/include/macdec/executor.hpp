#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "macdec/controller.hpp"
#include "macdec/evaluate.hpp"
#include "macdec/policy_io.hpp"

namespace macdec {

/// One seeded decentralized run of `h` steps, fully recorded.
EpisodeTrace run_episode(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                         std::uint64_t seed, std::size_t episode = 0);

/// Actions agent `agent` takes when fed only its own logged observations and
/// its own random stream.
std::vector<std::size_t> replay_agent(const ModelSpec& model, const OptionSet& options, std::size_t agent,
                                      std::shared_ptr<const FlatTree> tree, const EpisodeTrace& trace);

/// Domain-specific event counts for one trace (e.g. deliveries).
using TraceAnalyzer = std::function<std::map<std::string, double>(const EpisodeTrace&)>;

struct BatchStats {
  McEstimate returns;
  std::size_t episodes = 0;
  std::size_t falloff_episodes = 0;
  /// option_starts[i][m]: times agent i entered option m.
  std::vector<std::vector<std::size_t>> option_starts;
  std::map<std::string, double> events;  // summed analyzer output
};

/// Episodes 0..n-1 of base `seed`; `each` sees every trace when given.
BatchStats batch_stats(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                       std::size_t n, std::uint64_t seed, const TraceAnalyzer& analyzer = {},
                       const std::function<void(const EpisodeTrace&)>& each = {});

/// `{"episode", "t", "state", "action", "observation", "next_state", "reward", "agents": [...]}` per
/// step followed by `{"episode", "return", "steps", "fell_off"}`.
std::string trace_to_jsonl(const ModelSpec& model, const OptionSet& options, const EpisodeTrace& trace);

// Controller export

enum class ExportFormat { Dot, Json };
ExportFormat parse_export_format(std::string_view name);

/// Tree nodes in preorder; node 0 is initial. Edges carry the signal label.
struct Automaton {
  struct Edge {
    std::size_t from;
    std::size_t to;
    std::string signal;
    bool operator==(const Edge&) const = default;
  };
  std::size_t agent = 0;
  std::size_t initial = 0;
  std::vector<std::string> nodes;  // option names
  std::vector<Edge> edges;
  bool operator==(const Automaton&) const = default;
};

Automaton to_automaton(const NamedTree& tree, std::size_t agent);
/// Inverse of to_automaton. Throws PolicyError unless the graph is a tree rooted at `initial`.
NamedTree from_automaton(const Automaton& automaton);

nlohmann::ordered_json automaton_to_json(const Automaton& automaton);
Automaton automaton_from_json(const nlohmann::ordered_json& j);

std::string export_controller(const NamedTree& tree, std::size_t agent, ExportFormat format);
std::string export_controller(const OptionSet& options, std::size_t agent, const Tree& tree, ExportFormat format);
/// Reads a JSON export back into a tree.
NamedTree import_controller(std::string_view json_text);

/// Executable automaton: the controller runs directly on the exported graph.
FlatTree flat_from_automaton(const OptionSet& options, const Automaton& automaton);

}  // namespace macdec
