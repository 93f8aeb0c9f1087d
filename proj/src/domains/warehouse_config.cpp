#include <fmt/format.h>

#include <stdexcept>

#include "macdec/domains/toys.hpp"
#include "macdec/domains/warehouse.hpp"
#include "../text.hpp"

namespace macdec {

namespace {

Region parse_region(std::string_view tok, std::size_t line) {
  if (tok == "depot1") return Region::Depot1;
  if (tok == "depot2") return Region::Depot2;
  if (tok == "dropoff") return Region::Dropoff;
  if (tok == "waiting") return Region::Waiting;
  if (tok == "corridor") return Region::Corridor;
  throw ParseError(line, "unknown region '" + std::string(tok) + "'");
}

const char* region_token(Region r) {
  switch (r) {
    case Region::Depot1: return "depot1";
    case Region::Depot2: return "depot2";
    case Region::Dropoff: return "dropoff";
    case Region::Waiting: return "waiting";
    case Region::Corridor: return "corridor";
  }
  return "corridor";
}

Scenario parse_scenario(std::string_view tok, std::size_t line) {
  if (tok == "1" || tok == "no_comm") return Scenario::NoComm;
  if (tok == "2" || tok == "local_comm") return Scenario::LocalComm;
  if (tok == "3" || tok == "global_signal") return Scenario::GlobalSignal;
  throw ParseError(line, "unknown scenario '" + std::string(tok) + "'");
}

bool parse_bool(std::string_view tok, std::size_t line) {
  if (tok == "1" || tok == "true" || tok == "yes") return true;
  if (tok == "0" || tok == "false" || tok == "no") return false;
  throw ParseError(line, "expected a boolean, got '" + std::string(tok) + "'");
}

std::size_t cell_index(const Layout& l, std::string_view name, std::size_t line) {
  for (std::size_t c = 0; c < l.cells.size(); ++c)
    if (l.cells[c].name == name) return c;
  throw ParseError(line, "unknown cell '" + std::string(name) + "'");
}

}  // namespace

GenConfig parse_gen_config(std::string_view text) {
  GenConfig out;
  auto& w = out.warehouse;
  bool custom_layout = false;
  for (const auto& ln : text::lines(text)) {
    std::string_view key, value;
    if (!text::key_value(ln.content, key, value)) throw ParseError(ln.number, "expected 'key: value'");
    const auto toks = text::split_ws(value);
    auto one = [&]() -> std::string_view {
      if (toks.size() != 1) throw ParseError(ln.number, "'" + std::string(key) + "' takes one value");
      return toks[0];
    };
    if (key == "toy") {
      out.toy = std::string(one());
    } else if (key == "robots") {
      auto n = text::to_int(one(), ln.number);
      if (n < 1) throw ParseError(ln.number, "robots must be positive");
      w.robots = static_cast<std::size_t>(n);
    } else if (key == "layout") {
      try {
        w.layout = named_layout(one());
      } catch (const std::invalid_argument& e) {
        throw ParseError(ln.number, e.what());
      }
    } else if (key == "cell") {
      if (toks.size() != 2) throw ParseError(ln.number, "cell takes a name and a region");
      if (!custom_layout) w.layout = {"custom", {}, {}};
      custom_layout = true;
      w.layout.cells.push_back({std::string(toks[0]), parse_region(toks[1], ln.number)});
    } else if (key == "edge") {
      if (toks.size() != 2) throw ParseError(ln.number, "edge takes two cell names");
      w.layout.edges.emplace_back(cell_index(w.layout, toks[0], ln.number), cell_index(w.layout, toks[1], ln.number));
    } else if (key == "box") {
      if (toks.size() != 2) throw ParseError(ln.number, "box takes a size and a depot");
      BoxSpec b;
      if (toks[0] == "small")
        b.size = BoxSize::Small;
      else if (toks[0] == "large")
        b.size = BoxSize::Large;
      else
        throw ParseError(ln.number, "box size must be small or large");
      if (toks[1] == "depot1")
        b.depot = 1;
      else if (toks[1] == "depot2")
        b.depot = 2;
      else if (toks[1] == "any")
        b.depot = 0;
      else
        throw ParseError(ln.number, "box depot must be depot1, depot2 or any");
      w.boxes.push_back(b);
    } else if (key == "scenario") {
      w.scenario = parse_scenario(one(), ln.number);
    } else if (key == "nav_noise") {
      w.nav_noise = text::to_double(one(), ln.number);
    } else if (key == "push_noise") {
      w.push_noise = text::to_double(one(), ln.number);
    } else if (key == "reward_small") {
      w.small_reward = text::to_double(one(), ln.number);
    } else if (key == "reward_large") {
      w.large_reward = text::to_double(one(), ln.number);
    } else if (key == "step_cost") {
      w.step_cost = text::to_double(one(), ln.number);
    } else if (key == "sensing_radius") {
      w.sensing_radius = static_cast<int>(text::to_int(one(), ln.number));
    } else if (key == "start") {
      w.start.clear();
      for (auto t : toks) w.start.emplace_back(t);
    } else if (key == "horizon") {
      w.horizon = static_cast<int>(text::to_int(one(), ln.number));
    } else if (key == "discount") {
      w.discount = text::to_double(one(), ln.number);
    } else if (key == "depot_from_waiting_only") {
      w.depot_from_waiting_only = parse_bool(one(), ln.number);
    } else if (key == "state_cap") {
      auto n = text::to_int(one(), ln.number);
      if (n < 1) throw ParseError(ln.number, "state_cap must be positive");
      w.state_cap = static_cast<std::size_t>(n);
    } else {
      throw ParseError(ln.number, "unknown key '" + std::string(key) + "'");
    }
  }
  return out;
}

std::string emit_warehouse_config(const WarehouseConfig& cfg) {
  std::string out = fmt::format("robots: {}\n", cfg.robots);
  const bool named = cfg.layout.name != "custom" && [&] {
    try {
      return named_layout(cfg.layout.name) == cfg.layout;
    } catch (const std::invalid_argument&) {
      return false;
    }
  }();
  if (named) {
    out += fmt::format("layout: {}\n", cfg.layout.name);
  } else {
    for (const auto& c : cfg.layout.cells) out += fmt::format("cell: {} {}\n", c.name, region_token(c.region));
    for (auto [a, b] : cfg.layout.edges)
      out += fmt::format("edge: {} {}\n", cfg.layout.cells[a].name, cfg.layout.cells[b].name);
  }
  for (const auto& b : cfg.boxes)
    out += fmt::format("box: {} {}\n", b.size == BoxSize::Small ? "small" : "large",
                       b.depot == 0 ? "any" : b.depot == 1 ? "depot1" : "depot2");
  out += fmt::format("scenario: {}\n", static_cast<int>(cfg.scenario));
  out += fmt::format("nav_noise: {}\npush_noise: {}\n", cfg.nav_noise, cfg.push_noise);
  out += fmt::format("reward_small: {}\nreward_large: {}\nstep_cost: {}\n", cfg.small_reward, cfg.large_reward,
                     cfg.step_cost);
  out += fmt::format("sensing_radius: {}\n", cfg.sensing_radius);
  if (!cfg.start.empty()) out += fmt::format("start: {}\n", fmt::join(cfg.start, " "));
  out += fmt::format("horizon: {}\ndiscount: {}\n", cfg.horizon, cfg.discount);
  out += fmt::format("depot_from_waiting_only: {}\n", cfg.depot_from_waiting_only ? 1 : 0);
  out += fmt::format("state_cap: {}\n", cfg.state_cap);
  return out;
}

Domain generate(const GenConfig& cfg) {
  if (cfg.toy) return gen_toy(*cfg.toy);
  return gen_warehouse(cfg.warehouse);
}

}  // namespace macdec
