#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macdec/controller.hpp"
#include "macdec/domains/domain.hpp"
#include "macdec/heuristic.hpp"
#include "macdec/policy.hpp"

namespace macdec {

enum class Scenario { NoComm = 1, LocalComm = 2, GlobalSignal = 3 };
enum class Region { Depot1, Depot2, Dropoff, Waiting, Corridor };
enum class BoxSize { Small, Large };

struct Cell {
  std::string name;
  Region region = Region::Corridor;
  bool operator==(const Cell&) const = default;
};

struct Layout {
  std::string name;
  std::vector<Cell> cells;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  bool operator==(const Layout&) const = default;
};

/// drop - dep1 - wait - dep2 - drop
Layout layout_ring4();
/// drop - hall, hall - dep1, hall - dep2, dep1 - wait - dep2
Layout layout_hall5();
/// 3x3 grid: dep1 n dep2 / w c e / drop s wait
Layout layout_grid9();
/// "ring4", "hall5" or "grid9".
Layout named_layout(std::string_view name);

struct BoxSpec {
  BoxSize size = BoxSize::Small;
  int depot = 1;  // 1, 2, or 0 for either (uniform at start)
  bool operator==(const BoxSpec&) const = default;
};

struct WarehouseConfig {
  std::size_t robots = 2;
  Layout layout = layout_ring4();
  std::vector<BoxSpec> boxes;
  Scenario scenario = Scenario::NoComm;
  double nav_noise = 0.1;   // chance a move does not advance
  double push_noise = 0.25; // same, for a pair pushing a large box
  double small_reward = 10.0;
  double large_reward = 20.0;
  double step_cost = 0.1;  // per robot per step
  int sensing_radius = 0;  // in cells
  std::vector<std::string> start;  // per robot start cell; empty means drop-off
  int horizon = 8;
  double discount = 1.0;
  /// Scenario 2: depot options start only from the waiting room.
  bool depot_from_waiting_only = true;
  std::size_t state_cap = 2'000'000;
  bool operator==(const WarehouseConfig&) const = default;
};

/// Problems with the configuration; a large box with fewer than two robots is reported too.
std::vector<Violation> validate_config(const WarehouseConfig& cfg);

/// Size of the flat state set (product of robot cells, box locations and the light).
std::size_t count_states(const WarehouseConfig& cfg);

/// Model plus per-robot options. Throws ValidationError for a bad config and
/// CapExceeded when the state count exceeds `cfg.state_cap`.
Domain gen_warehouse(const WarehouseConfig& cfg);

// State decoding

struct BoxLocation {
  enum class Kind { Depot, Held, Goal } kind = Kind::Depot;
  int depot = 1;
  std::vector<std::size_t> carriers;
  bool operator==(const BoxLocation&) const = default;
};

struct WarehouseState {
  std::vector<std::size_t> robot_cell;
  std::vector<BoxLocation> boxes;
  int light = 0;  // 0 off, 1 blue, 2 red
  bool operator==(const WarehouseState&) const = default;
};

class WarehouseCodec {
 public:
  explicit WarehouseCodec(const WarehouseConfig& cfg);
  std::size_t num_states() const { return total_; }
  WarehouseState decode(std::size_t state) const;
  std::size_t encode(const WarehouseState& state) const;
  std::string name(std::size_t state) const;
  std::size_t cell(Region region) const;

 private:
  std::size_t box_radix(std::size_t b) const;
  std::vector<int> depots_of(std::size_t b) const;

  WarehouseConfig cfg_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::size_t total_ = 0;
};

/// Shortest-path distance in cells.
std::vector<std::vector<int>> cell_distances(const Layout& layout);

// Baselines, heuristic and trace predicates

std::vector<std::string> warehouse_baselines();
/// "both-to-depot1", "both-to-depot2" or "never-help", as trees spanning `h`.
JointPolicy warehouse_baseline(const WarehouseConfig& cfg, const OptionSet& options, std::string_view name, int h);

/// State-feedback heuristic: fetch the nearest box, team up on large ones.
std::unique_ptr<HeuristicPolicy> make_warehouse_greedy(const WarehouseConfig& cfg, const ModelSpec& model,
                                                       const OptionSet& options);
void register_warehouse_heuristics(HeuristicRegistry& registry, const WarehouseConfig& cfg);

/// Counts "delivered_small" and "delivered_large" in a trace.
std::map<std::string, double> warehouse_events(const WarehouseConfig& cfg, const EpisodeTrace& trace);
/// First moves of robots 0 and 1 head to different depots.
bool starts_toward_different_depots(const WarehouseConfig& cfg, const ModelSpec& model, const EpisodeTrace& trace);
/// Every large-box delivery is preceded by its two carriers sharing the box's depot cell.
bool large_delivered_after_colocation(const WarehouseConfig& cfg, const EpisodeTrace& trace);
bool large_delivered(const WarehouseConfig& cfg, const EpisodeTrace& trace);

// Config files

/// What `gen` builds: a bundled toy or a warehouse.
struct GenConfig {
  std::optional<std::string> toy;
  WarehouseConfig warehouse;
};

GenConfig parse_gen_config(std::string_view text);
std::string emit_warehouse_config(const WarehouseConfig& cfg);
Domain generate(const GenConfig& cfg);

}  // namespace macdec
