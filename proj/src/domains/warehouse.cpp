#include "macdec/domains/warehouse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>

namespace macdec {

// Layouts

Layout layout_ring4() {
  return {"ring4",
          {{"drop", Region::Dropoff}, {"dep1", Region::Depot1}, {"wait", Region::Waiting}, {"dep2", Region::Depot2}},
          {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
}

Layout layout_hall5() {
  return {"hall5",
          {{"drop", Region::Dropoff},
           {"hall", Region::Corridor},
           {"dep1", Region::Depot1},
           {"dep2", Region::Depot2},
           {"wait", Region::Waiting}},
          {{0, 1}, {1, 2}, {1, 3}, {2, 4}, {4, 3}}};
}

Layout layout_grid9() {
  Layout l{"grid9",
           {{"dep1", Region::Depot1},
            {"north", Region::Corridor},
            {"dep2", Region::Depot2},
            {"west", Region::Corridor},
            {"center", Region::Corridor},
            {"east", Region::Corridor},
            {"drop", Region::Dropoff},
            {"south", Region::Corridor},
            {"wait", Region::Waiting}},
           {}};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      if (c + 1 < 3) l.edges.emplace_back(3 * r + c, 3 * r + c + 1);
      if (r + 1 < 3) l.edges.emplace_back(3 * r + c, 3 * (r + 1) + c);
    }
  return l;
}

Layout named_layout(std::string_view name) {
  if (name == "ring4") return layout_ring4();
  if (name == "hall5") return layout_hall5();
  if (name == "grid9") return layout_grid9();
  throw std::invalid_argument("unknown layout '" + std::string(name) + "'");
}

std::vector<std::vector<int>> cell_distances(const Layout& layout) {
  const std::size_t C = layout.cells.size();
  std::vector<std::vector<std::size_t>> adj(C);
  for (auto [a, b] : layout.edges) {
    adj.at(a).push_back(b);
    adj.at(b).push_back(a);
  }
  std::vector<std::vector<int>> dist(C, std::vector<int>(C, -1));
  for (std::size_t src = 0; src < C; ++src) {
    std::deque<std::size_t> q{src};
    dist[src][src] = 0;
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      for (auto v : adj[u])
        if (dist[src][v] < 0) {
          dist[src][v] = dist[src][u] + 1;
          q.push_back(v);
        }
    }
  }
  return dist;
}

namespace {

const char* region_name(Region r) {
  switch (r) {
    case Region::Depot1: return "depot1";
    case Region::Depot2: return "depot2";
    case Region::Dropoff: return "dropoff";
    case Region::Waiting: return "waiting";
    case Region::Corridor: return "corridor";
  }
  return "?";
}

std::optional<std::size_t> region_cell(const Layout& l, Region r) {
  for (std::size_t c = 0; c < l.cells.size(); ++c)
    if (l.cells[c].region == r) return c;
  return std::nullopt;
}

std::size_t sat_mul(std::size_t a, std::size_t b) {
  std::size_t r;
  return __builtin_mul_overflow(a, b, &r) ? std::numeric_limits<std::size_t>::max() : r;
}

}  // namespace

std::vector<Violation> validate_config(const WarehouseConfig& cfg) {
  std::vector<Violation> out;
  const auto& l = cfg.layout;
  if (cfg.robots < 1) out.push_back({"robots", "need at least one robot"});
  if (l.cells.empty()) out.push_back({"layout", "layout has no cells"});
  for (Region r : {Region::Depot1, Region::Depot2, Region::Dropoff, Region::Waiting}) {
    auto n = std::count_if(l.cells.begin(), l.cells.end(), [&](const Cell& c) { return c.region == r; });
    if (n != 1) out.push_back({fmt::format("layout {}", region_name(r)), "region needs exactly one cell", double(n)});
  }
  for (std::size_t a = 0; a < l.cells.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (l.cells[a].name == l.cells[b].name) out.push_back({"layout " + l.cells[a].name, "duplicate cell name"});
  for (auto [a, b] : l.edges)
    if (a >= l.cells.size() || b >= l.cells.size() || a == b)
      out.push_back({fmt::format("edge {}-{}", a, b), "edge endpoint out of range"});
  if (out.empty()) {
    auto d = cell_distances(l);
    for (std::size_t c = 0; c < l.cells.size(); ++c)
      if (d[0][c] < 0) out.push_back({"layout " + l.cells[c].name, "cell unreachable"});
  }
  for (std::size_t b = 0; b < cfg.boxes.size(); ++b) {
    if (cfg.boxes[b].depot < 0 || cfg.boxes[b].depot > 2)
      out.push_back({fmt::format("box {}", b), "depot must be 1, 2 or 0 (either)"});
    if (cfg.boxes[b].size == BoxSize::Large && cfg.robots < 2)
      out.push_back({fmt::format("box {}", b), "large box needs two robots and can never be delivered"});
  }
  if (!cfg.start.empty()) {
    if (cfg.start.size() != cfg.robots) out.push_back({"start", "need one start cell per robot"});
    for (const auto& s : cfg.start)
      if (std::none_of(l.cells.begin(), l.cells.end(), [&](const Cell& c) { return c.name == s; }))
        out.push_back({"start " + s, "unknown cell"});
  }
  if (!(cfg.nav_noise >= 0.0 && cfg.nav_noise < 1.0)) out.push_back({"nav_noise", "must lie in [0, 1)", cfg.nav_noise});
  if (!(cfg.push_noise >= 0.0 && cfg.push_noise < 1.0))
    out.push_back({"push_noise", "must lie in [0, 1)", cfg.push_noise});
  if (cfg.horizon < 1) out.push_back({"horizon", "must be positive", double(cfg.horizon)});
  if (!(cfg.discount > 0.0 && cfg.discount <= 1.0)) out.push_back({"discount", "must lie in (0, 1]", cfg.discount});
  if (cfg.sensing_radius < 0) out.push_back({"sensing_radius", "must be >= 0"});
  return out;
}

// State codec

WarehouseCodec::WarehouseCodec(const WarehouseConfig& cfg) : cfg_(cfg) {
  for (std::size_t i = 0; i < cfg.robots; ++i)
    for (std::size_t j = i + 1; j < cfg.robots; ++j) pairs_.emplace_back(i, j);
  total_ = count_states(cfg);
}

std::vector<int> WarehouseCodec::depots_of(std::size_t b) const {
  int d = cfg_.boxes[b].depot;
  if (d == 0) return {1, 2};
  return {d};
}

std::size_t WarehouseCodec::box_radix(std::size_t b) const {
  const std::size_t holders = cfg_.boxes[b].size == BoxSize::Small ? cfg_.robots : pairs_.size();
  return depots_of(b).size() + holders + 1;
}

std::size_t count_states(const WarehouseConfig& cfg) {
  std::size_t n = 1;
  const std::size_t C = cfg.layout.cells.size();
  for (std::size_t i = 0; i < cfg.robots; ++i) n = sat_mul(n, C);
  const std::size_t pairs = cfg.robots * (cfg.robots - (cfg.robots > 0 ? 1 : 0)) / 2;
  for (const auto& b : cfg.boxes) {
    const std::size_t depots = b.depot == 0 ? 2 : 1;
    n = sat_mul(n, depots + (b.size == BoxSize::Small ? cfg.robots : pairs) + 1);
  }
  if (cfg.scenario == Scenario::GlobalSignal) n = sat_mul(n, 3);
  return n;
}

WarehouseState WarehouseCodec::decode(std::size_t s) const {
  if (s >= total_) throw std::out_of_range("warehouse state out of range");
  WarehouseState st;
  st.robot_cell.resize(cfg_.robots);
  st.boxes.resize(cfg_.boxes.size());
  if (cfg_.scenario == Scenario::GlobalSignal) {
    st.light = static_cast<int>(s % 3);
    s /= 3;
  }
  for (std::size_t b = cfg_.boxes.size(); b-- > 0;) {
    const std::size_t r = box_radix(b);
    std::size_t k = s % r;
    s /= r;
    auto depots = depots_of(b);
    auto& loc = st.boxes[b];
    if (k < depots.size()) {
      loc.kind = BoxLocation::Kind::Depot;
      loc.depot = depots[k];
      continue;
    }
    k -= depots.size();
    loc.depot = 0;
    if (k == r - depots.size() - 1) {
      loc.kind = BoxLocation::Kind::Goal;
    } else if (cfg_.boxes[b].size == BoxSize::Small) {
      loc.kind = BoxLocation::Kind::Held;
      loc.carriers = {k};
    } else {
      loc.kind = BoxLocation::Kind::Held;
      loc.carriers = {pairs_[k].first, pairs_[k].second};
    }
  }
  const std::size_t C = cfg_.layout.cells.size();
  for (std::size_t i = cfg_.robots; i-- > 0;) {
    st.robot_cell[i] = s % C;
    s /= C;
  }
  return st;
}

std::size_t WarehouseCodec::encode(const WarehouseState& st) const {
  const std::size_t C = cfg_.layout.cells.size();
  std::size_t s = 0;
  for (std::size_t i = 0; i < cfg_.robots; ++i) s = s * C + st.robot_cell.at(i);
  for (std::size_t b = 0; b < cfg_.boxes.size(); ++b) {
    const auto& loc = st.boxes.at(b);
    auto depots = depots_of(b);
    std::size_t k = 0;
    switch (loc.kind) {
      case BoxLocation::Kind::Depot: {
        auto it = std::find(depots.begin(), depots.end(), loc.depot);
        if (it == depots.end()) throw std::invalid_argument("box cannot be in that depot");
        k = static_cast<std::size_t>(it - depots.begin());
        break;
      }
      case BoxLocation::Kind::Held:
        if (cfg_.boxes[b].size == BoxSize::Small) {
          k = depots.size() + loc.carriers.at(0);
        } else {
          auto p = std::pair{std::min(loc.carriers.at(0), loc.carriers.at(1)), std::max(loc.carriers[0], loc.carriers[1])};
          auto it = std::find(pairs_.begin(), pairs_.end(), p);
          if (it == pairs_.end()) throw std::invalid_argument("bad carrier pair");
          k = depots.size() + static_cast<std::size_t>(it - pairs_.begin());
        }
        break;
      case BoxLocation::Kind::Goal:
        k = box_radix(b) - 1;
        break;
    }
    s = s * box_radix(b) + k;
  }
  if (cfg_.scenario == Scenario::GlobalSignal) s = s * 3 + static_cast<std::size_t>(st.light);
  return s;
}

std::string WarehouseCodec::name(std::size_t state) const {
  auto st = decode(state);
  std::string out = "r=";
  for (std::size_t i = 0; i < st.robot_cell.size(); ++i) {
    if (i) out += ',';
    out += cfg_.layout.cells[st.robot_cell[i]].name;
  }
  if (!st.boxes.empty()) {
    out += "/b=";
    for (std::size_t b = 0; b < st.boxes.size(); ++b) {
      if (b) out += ',';
      const auto& loc = st.boxes[b];
      if (loc.kind == BoxLocation::Kind::Depot)
        out += fmt::format("dep{}", loc.depot);
      else if (loc.kind == BoxLocation::Kind::Goal)
        out += "goal";
      else if (loc.carriers.size() == 1)
        out += fmt::format("h{}", loc.carriers[0]);
      else
        out += fmt::format("h{}+{}", loc.carriers[0], loc.carriers[1]);
    }
  }
  if (cfg_.scenario == Scenario::GlobalSignal) {
    static const char* lights[] = {"off", "blue", "red"};
    out += std::string("/l=") + lights[st.light];
  }
  return out;
}

std::size_t WarehouseCodec::cell(Region region) const {
  auto c = region_cell(cfg_.layout, region);
  if (!c) throw std::logic_error("layout lacks a region cell");
  return *c;
}

namespace {

// Primitive actions, shared by every robot.
enum Act : std::size_t {
  kNoop,
  kToDep1,
  kToDep2,
  kToDrop,
  kPickSmall,
  kPickLarge,
  kDrop,
  kToWait,
  kSignal1,
  kSignal2,
  kLightBlue,
  kLightRed,
  kLightOff,
};

struct ActionTable {
  std::vector<Act> acts;
  std::vector<std::string> names;
  std::size_t index(Act a) const {
    auto it = std::find(acts.begin(), acts.end(), a);
    if (it == acts.end()) throw std::logic_error("action not available in this scenario");
    return static_cast<std::size_t>(it - acts.begin());
  }
  bool has(Act a) const { return std::find(acts.begin(), acts.end(), a) != acts.end(); }
};

ActionTable action_table(Scenario sc) {
  ActionTable t;
  auto add = [&](Act a, const char* n) {
    t.acts.push_back(a);
    t.names.emplace_back(n);
  };
  add(kNoop, "noop");
  add(kToDep1, "to_dep1");
  add(kToDep2, "to_dep2");
  add(kToDrop, "to_drop");
  add(kPickSmall, "pick_small");
  add(kPickLarge, "pick_large");
  add(kDrop, "drop");
  if (sc != Scenario::NoComm) add(kToWait, "to_wait");
  if (sc == Scenario::LocalComm) {
    add(kSignal1, "signal1");
    add(kSignal2, "signal2");
  }
  if (sc == Scenario::GlobalSignal) {
    add(kLightBlue, "light_blue");
    add(kLightRed, "light_red");
    add(kLightOff, "light_off");
  }
  return t;
}

// Observation components.
struct Obs {
  std::size_t cell = 0;
  std::size_t seen = 0;   // 0 alone, 1 robot
  std::size_t view = 0;   // 0 none, 1 small, 2 large
  std::size_t held = 0;   // 0 free, 1 small, 2 large
  std::size_t heard = 0;  // 0 quiet, 1 sig1, 2 sig2
  std::size_t light = 0;  // 0 off, 1 blue, 2 red, 3 unseen
};

class ObsCodec {
 public:
  ObsCodec(std::size_t cells, Scenario sc) : cells_(cells), sc_(sc) {}
  std::size_t size() const {
    std::size_t n = cells_ * 2 * 3 * 3;
    if (sc_ == Scenario::LocalComm) n *= 3;
    if (sc_ == Scenario::GlobalSignal) n *= 4;
    return n;
  }
  std::size_t encode(const Obs& o) const {
    std::size_t k = ((o.cell * 2 + o.seen) * 3 + o.view) * 3 + o.held;
    if (sc_ == Scenario::LocalComm) k = k * 3 + o.heard;
    if (sc_ == Scenario::GlobalSignal) k = k * 4 + o.light;
    return k;
  }
  Obs decode(std::size_t k) const {
    Obs o;
    if (sc_ == Scenario::GlobalSignal) {
      o.light = k % 4;
      k /= 4;
    } else {
      o.light = 3;
    }
    if (sc_ == Scenario::LocalComm) {
      o.heard = k % 3;
      k /= 3;
    }
    o.held = k % 3;
    k /= 3;
    o.view = k % 3;
    k /= 3;
    o.seen = k % 2;
    o.cell = k / 2;
    return o;
  }
  std::vector<std::string> names(const Layout& l) const {
    static const char* seen[] = {"alone", "robot"};
    static const char* view[] = {"none", "small", "large"};
    static const char* held[] = {"free", "small", "large"};
    static const char* heard[] = {"quiet", "sig1", "sig2"};
    static const char* light[] = {"off", "blue", "red", "unseen"};
    std::vector<std::string> out;
    for (std::size_t k = 0; k < size(); ++k) {
      auto o = decode(k);
      std::string n = fmt::format("{}.{}.{}.{}", l.cells[o.cell].name, seen[o.seen], view[o.view], held[o.held]);
      if (sc_ == Scenario::LocalComm) n += std::string(".") + heard[o.heard];
      if (sc_ == Scenario::GlobalSignal) n += std::string(".") + light[o.light];
      out.push_back(std::move(n));
    }
    return out;
  }

 private:
  std::size_t cells_;
  Scenario sc_;
};

struct World {
  const WarehouseConfig& cfg;
  WarehouseCodec codec;
  ActionTable actions;
  ObsCodec obs;
  std::vector<std::vector<int>> dist;
  std::vector<std::vector<std::size_t>> next_hop;  // [cell][target]
  std::size_t dep1, dep2, drop, wait;

  explicit World(const WarehouseConfig& c)
      : cfg(c),
        codec(c),
        actions(action_table(c.scenario)),
        obs(c.layout.cells.size(), c.scenario),
        dist(cell_distances(c.layout)),
        dep1(codec.cell(Region::Depot1)),
        dep2(codec.cell(Region::Depot2)),
        drop(codec.cell(Region::Dropoff)),
        wait(codec.cell(Region::Waiting)) {
    const std::size_t C = c.layout.cells.size();
    std::vector<std::vector<std::size_t>> adj(C);
    for (auto [a, b] : c.layout.edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    next_hop.assign(C, std::vector<std::size_t>(C));
    for (std::size_t u = 0; u < C; ++u)
      for (std::size_t t = 0; t < C; ++t) {
        next_hop[u][t] = u;
        if (u == t) continue;
        std::size_t best = C;
        for (auto v : adj[u])
          if (dist[v][t] == dist[u][t] - 1 && v < best) best = v;
        next_hop[u][t] = best;
      }
  }

  std::optional<std::size_t> target(Act a) const {
    switch (a) {
      case kToDep1: return dep1;
      case kToDep2: return dep2;
      case kToDrop: return drop;
      case kToWait: return wait;
      default: return std::nullopt;
    }
  }

  int depot_at(std::size_t cell) const { return cell == dep1 ? 1 : cell == dep2 ? 2 : 0; }

  /// Box held by each robot (first in config order), or -1.
  std::vector<int> holdings(const WarehouseState& st) const {
    std::vector<int> h(cfg.robots, -1);
    for (std::size_t b = 0; b < st.boxes.size(); ++b)
      if (st.boxes[b].kind == BoxLocation::Kind::Held)
        for (auto r : st.boxes[b].carriers)
          if (h[r] < 0) h[r] = static_cast<int>(b);
    return h;
  }

  /// First box (config order) lying in depot `d`, or -1.
  int first_box_in(const WarehouseState& st, int d) const {
    for (std::size_t b = 0; b < st.boxes.size(); ++b)
      if (st.boxes[b].kind == BoxLocation::Kind::Depot && st.boxes[b].depot == d) return static_cast<int>(b);
    return -1;
  }

  bool near(std::size_t a, std::size_t b) const { return dist[a][b] <= cfg.sensing_radius; }

  // Deterministic part of a step: picks, drops and lights. Returns the reward.
  double settle(WarehouseState& st, const std::vector<Act>& act, const std::vector<int>& held) const {
    const std::size_t n = cfg.robots;
    double reward = -cfg.step_cost * static_cast<double>(n);
    for (int d : {1, 2}) {
      const std::size_t cell = d == 1 ? dep1 : dep2;
      std::vector<std::size_t> small_pickers, large_pickers;
      for (std::size_t r = 0; r < n; ++r) {
        if (held[r] >= 0 || st.robot_cell[r] != cell) continue;
        if (act[r] == kPickSmall) small_pickers.push_back(r);
        if (act[r] == kPickLarge) large_pickers.push_back(r);
      }
      std::size_t k = 0;
      for (std::size_t b = 0; b < st.boxes.size() && k < small_pickers.size(); ++b)
        if (cfg.boxes[b].size == BoxSize::Small && st.boxes[b].kind == BoxLocation::Kind::Depot &&
            st.boxes[b].depot == d)
          st.boxes[b] = {BoxLocation::Kind::Held, 0, {small_pickers[k++]}};
      k = 0;
      for (std::size_t b = 0; b < st.boxes.size() && k + 1 < large_pickers.size(); ++b)
        if (cfg.boxes[b].size == BoxSize::Large && st.boxes[b].kind == BoxLocation::Kind::Depot &&
            st.boxes[b].depot == d) {
          st.boxes[b] = {BoxLocation::Kind::Held, 0, {large_pickers[k], large_pickers[k + 1]}};
          k += 2;
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (act[r] != kDrop || held[r] < 0 || st.robot_cell[r] != drop) continue;
      auto& loc = st.boxes[held[r]];
      if (loc.kind != BoxLocation::Kind::Held) continue;
      loc = {BoxLocation::Kind::Goal, 0, {}};
      reward += cfg.boxes[held[r]].size == BoxSize::Small ? cfg.small_reward : cfg.large_reward;
    }
    if (cfg.scenario == Scenario::GlobalSignal) {
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t c = st.robot_cell[r];
        if ((act[r] == kLightBlue || act[r] == kLightRed) && depot_at(c) != 0) {
          st.light = act[r] == kLightBlue ? 1 : 2;
          break;
        }
        if (act[r] == kLightOff && c == wait) {
          st.light = 0;
          break;
        }
      }
    }
    return reward;
  }

  struct Unit {
    std::vector<std::size_t> robots;
    std::size_t target;
    double noise;
  };

  std::vector<Unit> movers(const WarehouseState& st, const std::vector<Act>& act, const std::vector<int>& held) const {
    std::vector<Unit> units;
    for (std::size_t r = 0; r < cfg.robots; ++r) {
      auto t = target(act[r]);
      if (!t) continue;
      if (held[r] >= 0 && cfg.boxes[held[r]].size == BoxSize::Large) continue;
      if (st.robot_cell[r] != *t) units.push_back({{r}, *t, cfg.nav_noise});
    }
    for (std::size_t b = 0; b < st.boxes.size(); ++b) {
      const auto& loc = st.boxes[b];
      if (cfg.boxes[b].size != BoxSize::Large || loc.kind != BoxLocation::Kind::Held) continue;
      const auto i = loc.carriers[0], j = loc.carriers[1];
      if (held[i] != static_cast<int>(b) || held[j] != static_cast<int>(b)) continue;
      auto t = target(act[i]);
      if (!t || act[i] != act[j]) continue;
      if (st.robot_cell[i] != *t || st.robot_cell[j] != *t) units.push_back({{i, j}, *t, cfg.push_noise});
    }
    return units;
  }

  SparseDist transition(std::size_t s, const std::vector<Act>& act, double& reward) const {
    const auto start = codec.decode(s);
    const auto held = holdings(start);
    WarehouseState st = start;
    reward = settle(st, act, held);
    const auto units = movers(start, act, held);
    std::vector<Entry> out;
    const std::size_t combos = std::size_t{1} << units.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
      double p = 1.0;
      WarehouseState next = st;
      for (std::size_t u = 0; u < units.size(); ++u) {
        const bool moves = mask >> u & 1;
        p *= moves ? 1.0 - units[u].noise : units[u].noise;
        if (moves)
          for (auto r : units[u].robots) next.robot_cell[r] = next_hop[next.robot_cell[r]][units[u].target];
      }
      if (p > 0.0) out.push_back({codec.encode(next), p});
    }
    return make_dist(std::move(out));
  }

  std::size_t observe_one(const WarehouseState& st, const std::vector<Act>& act, std::size_t i) const {
    Obs o;
    const std::size_t c = st.robot_cell[i];
    o.cell = c;
    for (std::size_t j = 0; j < cfg.robots; ++j)
      if (j != i && near(c, st.robot_cell[j])) o.seen = 1;
    const auto held = holdings(st);
    if (held[i] >= 0) o.held = cfg.boxes[held[i]].size == BoxSize::Small ? 1 : 2;
    if (int d = depot_at(c); d != 0 && held[i] < 0) {
      int b = first_box_in(st, d);
      if (b >= 0) o.view = cfg.boxes[b].size == BoxSize::Small ? 1 : 2;
    }
    if (cfg.scenario == Scenario::LocalComm)
      for (std::size_t j = 0; j < cfg.robots; ++j)
        if (j != i && near(c, st.robot_cell[j]) && (act[j] == kSignal1 || act[j] == kSignal2)) {
          o.heard = act[j] == kSignal1 ? 1 : 2;
          break;
        }
    if (cfg.scenario == Scenario::GlobalSignal) o.light = c == wait ? static_cast<std::size_t>(st.light) : 3;
    return obs.encode(o);
  }
};

// Option construction

struct OptDef {
  std::string name;
  std::vector<std::string> signals;
  std::function<Act(const Obs*)> act;  // null Obs means START
  std::function<double(const Obs&)> beta;
  std::function<std::size_t(const Obs&)> signal;
  bool root = false;
  bool anywhere = false;
  std::vector<std::pair<std::string, std::string>> after;
  std::optional<std::size_t> nav_target;
};

std::vector<OptDef> option_defs(const World& w) {
  const auto sc = w.cfg.scenario;
  std::vector<OptDef> defs;
  const auto at = [](std::size_t cell) { return [cell](const Obs& o) { return o.cell == cell ? 1.0 : 0.0; }; };
  const auto fixed = [](Act a) { return [a](const Obs*) { return a; }; };
  const auto by_view = [](const Obs& o) { return o.view; };
  const auto one = [](const Obs&) { return 1.0; };
  const auto zero_sig = [](const Obs&) { return std::size_t{0}; };

  for (int d : {1, 2}) {
    OptDef o;
    o.name = fmt::format("go_depot{}", d);
    o.signals = {"empty", "small", "large"};
    o.act = fixed(d == 1 ? kToDep1 : kToDep2);
    o.beta = at(d == 1 ? w.dep1 : w.dep2);
    o.signal = by_view;
    o.nav_target = d == 1 ? w.dep1 : w.dep2;
    const bool via_waiting = sc == Scenario::LocalComm && w.cfg.depot_from_waiting_only;
    o.root = !via_waiting;
    if (via_waiting) {
      o.after = {{"go_waiting", "alone"},         {"go_waiting", "robot"},         {"wait_for_robot", "robot"},
                 {"wait_for_robot", "signal1"},   {"wait_for_robot", "signal2"},   {"send_signal1", "done"},
                 {"send_signal2", "done"}};
    } else {
      o.anywhere = true;
    }
    defs.push_back(std::move(o));
  }
  {
    OptDef o;
    o.name = "go_dropoff";
    o.signals = {"arrived"};
    o.act = fixed(kToDrop);
    o.beta = at(w.drop);
    o.signal = zero_sig;
    o.after = {{"pick_small", "holding"}, {"pick_large", "holding"}};
    o.nav_target = w.drop;
    defs.push_back(std::move(o));
  }
  std::vector<std::string> depot_options = {"go_depot1", "go_depot2"};
  if (sc == Scenario::GlobalSignal) depot_options = {"go_depot1", "go_depot2", "off_go_depot1", "off_go_depot2"};
  {
    OptDef o;
    o.name = "pick_small";
    o.signals = {"holding", "failed"};
    o.act = fixed(kPickSmall);
    o.beta = one;
    o.signal = [](const Obs& x) { return x.held == 1 ? std::size_t{0} : std::size_t{1}; };
    for (const auto& g : depot_options) o.after.emplace_back(g, "small");
    defs.push_back(std::move(o));
  }
  {
    OptDef o;
    o.name = "pick_large";
    o.signals = {"holding"};
    o.act = fixed(kPickLarge);
    o.beta = [](const Obs& x) { return x.held == 2 ? 1.0 : 0.0; };
    o.signal = zero_sig;
    for (const auto& g : depot_options) o.after.emplace_back(g, "large");
    defs.push_back(std::move(o));
  }
  {
    OptDef o;
    o.name = "drop";
    o.signals = {"done"};
    o.act = fixed(kDrop);
    o.beta = one;
    o.signal = zero_sig;
    o.after = {{"go_dropoff", "arrived"}};
    defs.push_back(std::move(o));
  }
  if (sc == Scenario::LocalComm) {
    OptDef g;
    g.name = "go_waiting";
    g.signals = {"alone", "robot"};
    g.act = fixed(kToWait);
    g.beta = at(w.wait);
    g.signal = [](const Obs& x) { return x.seen; };
    g.root = true;
    g.anywhere = true;
    g.nav_target = w.wait;
    defs.push_back(std::move(g));

    OptDef wr;
    wr.name = "wait_for_robot";
    wr.signals = {"robot", "signal1", "signal2"};
    wr.act = fixed(kNoop);
    wr.beta = [](const Obs& x) { return x.seen || x.heard ? 1.0 : 0.0; };
    wr.signal = [](const Obs& x) { return x.heard; };
    wr.after = {{"go_waiting", "alone"}, {"go_waiting", "robot"}};
    defs.push_back(std::move(wr));

    for (int k : {1, 2}) {
      OptDef s;
      s.name = fmt::format("send_signal{}", k);
      s.signals = {"done"};
      s.act = fixed(k == 1 ? kSignal1 : kSignal2);
      s.beta = one;
      s.signal = zero_sig;
      s.after = {{"go_waiting", "alone"},       {"go_waiting", "robot"},       {"wait_for_robot", "robot"},
                 {"wait_for_robot", "signal1"}, {"wait_for_robot", "signal2"}};
      defs.push_back(std::move(s));
    }
  }
  if (sc == Scenario::GlobalSignal) {
    OptDef g;
    g.name = "go_waiting";
    g.signals = {"off", "blue", "red"};
    g.act = fixed(kToWait);
    g.beta = at(w.wait);
    g.signal = [](const Obs& x) { return x.light < 3 ? x.light : std::size_t{0}; };
    g.root = true;
    g.anywhere = true;
    g.nav_target = w.wait;
    defs.push_back(std::move(g));

    for (int k : {1, 2}) {
      OptDef l;
      l.name = k == 1 ? "light_blue" : "light_red";
      l.signals = {"done"};
      l.act = fixed(k == 1 ? kLightBlue : kLightRed);
      l.beta = one;
      l.signal = zero_sig;
      for (const auto& d : depot_options)
        for (const char* s : {"empty", "small", "large"}) l.after.emplace_back(d, s);
      l.after.emplace_back("pick_small", "failed");
      defs.push_back(std::move(l));
    }
    for (int d : {1, 2}) {
      OptDef o;
      o.name = fmt::format("off_go_depot{}", d);
      o.signals = {"empty", "small", "large"};
      const Act move = d == 1 ? kToDep1 : kToDep2;
      o.act = [move](const Obs* x) { return x && x->light != 0 && x->light != 3 ? kLightOff : move; };
      o.beta = at(d == 1 ? w.dep1 : w.dep2);
      o.signal = by_view;
      o.after = {{"go_waiting", "off"}, {"go_waiting", "blue"}, {"go_waiting", "red"}};
      o.nav_target = d == 1 ? w.dep1 : w.dep2;
      defs.push_back(std::move(o));
    }
  }
  return defs;
}

/// Lower bounds on option durations: for navigation options, the shortest
/// distance from any cell the option can start in; 1 otherwise.
std::vector<int> min_durations(const World& w, const std::vector<OptDef>& defs, const std::vector<std::size_t>& starts) {
  const std::size_t C = w.cfg.layout.cells.size();
  const std::size_t M = defs.size();
  auto index = [&](const std::string& n) {
    for (std::size_t m = 0; m < M; ++m)
      if (defs[m].name == n) return m;
    throw std::logic_error("unknown option " + n);
  };
  std::vector<std::vector<char>> start(M, std::vector<char>(C, 0)), end(M, std::vector<char>(C, 0));
  bool changed = true;
  while (changed) {
    changed = false;
    auto mark = [&](std::vector<char>& v, std::size_t c) {
      if (!v[c]) {
        v[c] = 1;
        changed = true;
      }
    };
    for (std::size_t m = 0; m < M; ++m) {
      if (defs[m].root)
        for (auto c : starts) mark(start[m], c);
      if (defs[m].anywhere) {
        for (std::size_t p = 0; p < M; ++p)
          for (std::size_t c = 0; c < C; ++c)
            if (end[p][c]) mark(start[m], c);
      }
      for (const auto& [pred, sig] : defs[m].after) {
        auto p = index(pred);
        for (std::size_t c = 0; c < C; ++c)
          if (end[p][c]) mark(start[m], c);
      }
      for (std::size_t c = 0; c < C; ++c)
        if (start[m][c]) {
          if (defs[m].nav_target)
            mark(end[m], *defs[m].nav_target);
          else
            mark(end[m], c);
        }
    }
  }
  std::vector<int> out(M, 1);
  for (std::size_t m = 0; m < M; ++m) {
    if (!defs[m].nav_target) continue;
    int best = std::numeric_limits<int>::max();
    for (std::size_t c = 0; c < C; ++c)
      if (start[m][c]) best = std::min(best, std::max(1, w.dist[c][*defs[m].nav_target]));
    out[m] = best == std::numeric_limits<int>::max() ? 1 : best;
  }
  return out;
}

std::vector<std::size_t> start_cells(const WarehouseConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cfg.robots; ++i) {
    if (cfg.start.empty()) {
      out.push_back(*region_cell(cfg.layout, Region::Dropoff));
      continue;
    }
    for (std::size_t c = 0; c < cfg.layout.cells.size(); ++c)
      if (cfg.layout.cells[c].name == cfg.start[i]) out.push_back(c);
  }
  return out;
}

}  // namespace

Domain gen_warehouse(const WarehouseConfig& cfg) {
  auto violations = validate_config(cfg);
  std::erase_if(violations, [](const Violation& v) { return v.message.find("large box needs") != std::string::npos; });
  if (!violations.empty()) throw ValidationError(std::move(violations));
  const std::size_t S = count_states(cfg);
  if (S > cfg.state_cap) throw CapExceeded("warehouse state count", S, cfg.state_cap);

  World w(cfg);
  std::vector<std::string> states(S);
  for (std::size_t s = 0; s < S; ++s) states[s] = w.codec.name(s);
  const auto obs_names = w.obs.names(cfg.layout);
  ModelSpec m(std::move(states), std::vector<std::vector<std::string>>(cfg.robots, w.actions.names),
              std::vector<std::vector<std::string>>(cfg.robots, obs_names));
  m.set_horizon(cfg.horizon);
  m.set_discount(cfg.discount);

  // b0: robots at their start cells, boxes uniformly over their possible depots
  std::vector<double> b0(S, 0.0);
  const auto starts = start_cells(cfg);
  std::vector<WarehouseState> init{{starts, {}, 0}};
  for (const auto& box : cfg.boxes) {
    std::vector<WarehouseState> next;
    for (const auto& st : init)
      for (int d : box.depot == 0 ? std::vector<int>{1, 2} : std::vector<int>{box.depot}) {
        auto x = st;
        x.boxes.push_back({BoxLocation::Kind::Depot, d, {}});
        next.push_back(std::move(x));
      }
    init = std::move(next);
  }
  for (const auto& st : init) b0[w.codec.encode(st)] += 1.0 / static_cast<double>(init.size());
  m.set_initial_belief(std::move(b0));

  const std::size_t A = m.num_joint_actions();
  std::vector<Act> act(cfg.robots);
  std::vector<std::size_t> obs_parts(cfg.robots);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t i = 0; i < cfg.robots; ++i) act[i] = w.actions.acts[m.action_part(a, i)];
    for (std::size_t s = 0; s < S; ++s) {
      double r = 0.0;
      m.set_transition(s, a, w.transition(s, act, r));
      m.set_reward(s, a, r);
      const auto st = w.codec.decode(s);
      for (std::size_t i = 0; i < cfg.robots; ++i) obs_parts[i] = w.observe_one(st, act, i);
      m.set_observation(a, s, {{m.encode_observation(obs_parts), 1.0}});
    }
  }

  const auto defs = option_defs(w);
  const auto durations = min_durations(w, defs, starts);
  OptionSet options;
  options.agents.resize(cfg.robots);
  const std::size_t nobs = w.obs.size();
  for (std::size_t i = 0; i < cfg.robots; ++i) {
    for (std::size_t k = 0; k < defs.size(); ++k) {
      const auto& d = defs[k];
      OptionSpec o;
      o.name = d.name;
      o.agent = i;
      o.signals = d.signals;
      o.root_applicable = d.root;
      o.applicable_anywhere = d.anywhere;
      o.min_duration = durations[k];
      o.policy.resize(nobs + 1);
      o.termination.assign(nobs, 0.0);
      o.signal_of.assign(nobs, kNoSignal);
      for (std::size_t x = 0; x < nobs; ++x) {
        const Obs ob = w.obs.decode(x);
        o.policy[x] = {{w.actions.index(d.act(&ob)), 1.0}};
        o.termination[x] = d.beta(ob);
        if (o.termination[x] > 0.0) o.signal_of[x] = d.signal(ob);
      }
      o.policy[nobs] = {{w.actions.index(d.act(nullptr)), 1.0}};
      options.agents[i].push_back(std::move(o));
    }
    for (std::size_t k = 0; k < defs.size(); ++k)
      for (const auto& [pred, sig] : defs[k].after) {
        auto p = options.find(i, pred);
        if (!p) throw std::logic_error("unknown predecessor " + pred);
        auto s = find_signal(options.at(i, *p), sig);
        if (!s) throw std::logic_error("unknown signal " + sig);
        options.agents[i][k].initiation.emplace_back(*p, *s);
      }
  }
  return {fmt::format("warehouse-s{}", static_cast<int>(cfg.scenario)), std::move(m), std::move(options), std::nullopt};
}

// Baselines

std::vector<std::string> warehouse_baselines() { return {"both-to-depot1", "both-to-depot2", "never-help"}; }

JointPolicy warehouse_baseline(const WarehouseConfig& cfg, const OptionSet& options, std::string_view name, int h) {
  const auto names = warehouse_baselines();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw std::invalid_argument("unknown baseline '" + std::string(name) + "'");
  const bool never_help = name == "never-help";
  JointPolicy out;
  for (std::size_t i = 0; i < cfg.robots; ++i) {
    const int home = name == "both-to-depot1" ? 1 : name == "both-to-depot2" ? 2 : (i % 2 == 0 ? 1 : 2);
    const std::string home_opt = fmt::format("go_depot{}", home);
    const std::string away_opt = fmt::format("go_depot{}", 3 - home);
    auto rule = [&](const std::string& opt, const std::string& sig) -> std::string {
      if (opt.starts_with("go_depot") || opt.starts_with("off_go_depot")) {
        const std::string other = opt.back() == '1' ? "go_depot2" : "go_depot1";
        if (sig == "small") return "pick_small";
        if (sig == "large") return never_help ? other : "pick_large";
        return other;
      }
      if (opt == "pick_small") return sig == "holding" ? "go_dropoff" : (never_help ? away_opt : home_opt);
      if (opt == "pick_large") return "go_dropoff";
      if (opt == "go_dropoff") return "drop";
      return home_opt;
    };
    std::map<std::pair<std::size_t, int>, Tree> memo;
    std::function<Tree(std::size_t, int)> build = [&](std::size_t m, int remaining) -> Tree {
      if (auto it = memo.find({m, remaining}); it != memo.end()) return it->second;
      const auto& spec = options.at(i, m);
      std::vector<Tree> children(spec.signals.size());
      const int left = remaining - spec.min_duration;
      if (left > 0)
        for (std::size_t s = 0; s < spec.signals.size(); ++s) {
          auto next = options.find(i, rule(spec.name, spec.signals[s]));
          if (!next || !applicable(options.at(i, *next), Context::after(m, s))) {
            auto alt = successors(options, i, m, s);
            next = alt.empty() ? std::nullopt : std::optional<std::size_t>(alt.front());
          }
          if (next) children[s] = build(*next, left);
        }
      auto t = make_node(options, i, m, std::move(children));
      memo.emplace(std::pair{m, remaining}, t);
      return t;
    };
    auto root = options.find(i, home_opt);
    if (!root) throw std::invalid_argument("options lack " + home_opt);
    out.push_back(build(*root, h));
  }
  return out;
}

// Heuristic

namespace {

// chance of a uniformly random action instead of the greedy one
constexpr double kExplore = 0.1;

class WarehouseGreedy : public HeuristicPolicy {
 public:
  WarehouseGreedy(const WarehouseConfig& cfg, const ModelSpec& model) : world_(cfg), model_(model) {}
  Mode mode() const override { return Mode::StateFeedback; }
  std::string name() const override { return "warehouse-greedy"; }
  void begin_episode(Rng&) override {}
  void observe(std::size_t, Rng&) override {}

  std::size_t joint_action(int, std::size_t state, Rng& rng) override {
    const auto& cfg = world_.cfg;
    const auto st = world_.codec.decode(state);
    const auto held = world_.holdings(st);
    std::vector<std::size_t> parts(cfg.robots);
    std::vector<std::size_t> waiting_boxes;
    // small boxes first, so robots spread out before teaming up
    for (BoxSize size : {BoxSize::Small, BoxSize::Large})
      for (std::size_t b = 0; b < st.boxes.size(); ++b)
        if (st.boxes[b].kind == BoxLocation::Kind::Depot && cfg.boxes[b].size == size) waiting_boxes.push_back(b);
    for (std::size_t r = 0; r < cfg.robots; ++r) {
      Act a = kNoop;
      const std::size_t c = st.robot_cell[r];
      if (held[r] >= 0) {
        a = c == world_.drop ? kDrop : kToDrop;
      } else if (int d = world_.depot_at(c); d != 0 && world_.first_box_in(st, d) >= 0) {
        a = cfg.boxes[world_.first_box_in(st, d)].size == BoxSize::Small ? kPickSmall : kPickLarge;
      } else if (!waiting_boxes.empty()) {
        const auto& box = st.boxes[waiting_boxes[r % waiting_boxes.size()]];
        a = box.depot == 1 ? kToDep1 : kToDep2;
      }
      if (uniform01(rng) < kExplore) {
        const auto& acts = world_.actions.acts;
        a = acts[std::min(acts.size() - 1, static_cast<std::size_t>(uniform01(rng) * double(acts.size())))];
      }
      parts[r] = world_.actions.index(a);
    }
    return model_.encode_action(parts);
  }

 private:
  World world_;
  const ModelSpec& model_;
};

}  // namespace

std::unique_ptr<HeuristicPolicy> make_warehouse_greedy(const WarehouseConfig& cfg, const ModelSpec& model,
                                                       const OptionSet&) {
  return std::make_unique<WarehouseGreedy>(cfg, model);
}

void register_warehouse_heuristics(HeuristicRegistry& registry, const WarehouseConfig& cfg) {
  registry.add("warehouse-greedy", [cfg](const ModelSpec& m, const OptionSet& o) {
    return make_warehouse_greedy(cfg, m, o);
  });
}

// Trace predicates

std::map<std::string, double> warehouse_events(const WarehouseConfig& cfg, const EpisodeTrace& trace) {
  WarehouseCodec codec(cfg);
  std::map<std::string, double> out{{"delivered_small", 0.0}, {"delivered_large", 0.0}};
  for (const auto& step : trace.steps) {
    auto before = codec.decode(step.state);
    auto after = codec.decode(step.next_state);
    for (std::size_t b = 0; b < cfg.boxes.size(); ++b)
      if (before.boxes[b].kind != BoxLocation::Kind::Goal && after.boxes[b].kind == BoxLocation::Kind::Goal)
        out[cfg.boxes[b].size == BoxSize::Small ? "delivered_small" : "delivered_large"] += 1.0;
  }
  return out;
}

bool starts_toward_different_depots(const WarehouseConfig& cfg, const ModelSpec& model, const EpisodeTrace& trace) {
  if (trace.steps.empty() || cfg.robots < 2) return false;
  const auto acts = action_table(cfg.scenario);
  const auto a0 = acts.acts[model.action_part(trace.steps[0].joint_action, 0)];
  const auto a1 = acts.acts[model.action_part(trace.steps[0].joint_action, 1)];
  return (a0 == kToDep1 && a1 == kToDep2) || (a0 == kToDep2 && a1 == kToDep1);
}

bool large_delivered(const WarehouseConfig& cfg, const EpisodeTrace& trace) {
  return warehouse_events(cfg, trace)["delivered_large"] > 0.0;
}

bool large_delivered_after_colocation(const WarehouseConfig& cfg, const EpisodeTrace& trace) {
  WarehouseCodec codec(cfg);
  World w(cfg);
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    auto before = codec.decode(trace.steps[k].state);
    auto after = codec.decode(trace.steps[k].next_state);
    for (std::size_t b = 0; b < cfg.boxes.size(); ++b) {
      if (cfg.boxes[b].size != BoxSize::Large) continue;
      if (before.boxes[b].kind == BoxLocation::Kind::Goal || after.boxes[b].kind != BoxLocation::Kind::Goal) continue;
      if (before.boxes[b].kind != BoxLocation::Kind::Held || before.boxes[b].carriers.size() != 2) return false;
      const auto i = before.boxes[b].carriers[0], j = before.boxes[b].carriers[1];
      bool met = false;
      for (std::size_t t = 0; t <= k && !met; ++t) {
        auto st = codec.decode(trace.steps[t].state);
        if (st.boxes[b].kind != BoxLocation::Kind::Depot) continue;
        const std::size_t cell = st.boxes[b].depot == 1 ? w.dep1 : w.dep2;
        met = st.robot_cell[i] == cell && st.robot_cell[j] == cell;
      }
      if (!met) return false;
    }
  }
  return true;
}

}  // namespace macdec
