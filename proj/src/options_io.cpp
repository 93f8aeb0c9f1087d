#include "macdec/options_io.hpp"

#include <fmt/format.h>

#include <map>

#include "macdec/model_io.hpp"
#include "text.hpp"

namespace macdec {

namespace {

struct PendingInit {
  std::size_t line;
  std::string predecessor;
  std::string label;
};

struct Block {
  std::size_t line = 0;
  OptionSpec spec;
  bool has_signals_line = false;
  // keyed by observation index, nobs = START, kWildcard = `*`
  std::map<std::size_t, std::vector<Entry>> pi;
  std::map<std::size_t, double> beta;
  std::map<std::size_t, std::string> signal;
  std::vector<PendingInit> inits;
};

constexpr std::size_t kWildcard = static_cast<std::size_t>(-2);

class OptionsReader {
 public:
  OptionsReader(const ModelSpec& model, std::string_view source) : model_(model), lines_(text::lines(source)) {}

  OptionSet read() {
    for (const auto& line : lines_) {
      if (line.content.starts_with("option ") || line.content == "option") {
        open_block(line);
        continue;
      }
      if (blocks_.empty()) throw ParseError(line.number, "expected 'option <name> ...' before option lines");
      std::string_view key, value;
      if (!text::key_value(line.content, key, value)) throw ParseError(line.number, "expected 'key: value'");
      auto& b = blocks_.back();
      if (key == "signals") {
        if (b.has_signals_line) throw ParseError(line.number, "duplicate 'signals:'");
        b.has_signals_line = true;
        for (auto tok : text::split_ws(value)) {
          if (find_signal(b.spec, tok)) throw ParseError(line.number, "duplicate signal '" + std::string(tok) + "'");
          b.spec.signals.emplace_back(tok);
        }
      } else if (key == "pi") {
        read_pi(b, value, line.number);
      } else if (key == "beta") {
        auto toks = text::split_ws(value);
        if (toks.size() != 2) throw ParseError(line.number, "beta needs '<obs|*> <prob>'");
        auto o = observation(b.spec.agent, toks[0], false, line.number);
        if (!b.beta.emplace(o, text::to_double(toks[1], line.number)).second)
          throw ParseError(line.number, "duplicate beta entry");
      } else if (key == "signal") {
        auto toks = text::split_ws(value);
        if (toks.size() != 2) throw ParseError(line.number, "signal needs '<obs|*> <label>'");
        auto o = observation(b.spec.agent, toks[0], false, line.number);
        if (!b.signal.emplace(o, std::string(toks[1])).second)
          throw ParseError(line.number, "duplicate signal entry");
        if (!b.has_signals_line && !find_signal(b.spec, toks[1])) b.spec.signals.emplace_back(toks[1]);
      } else if (key == "init") {
        auto toks = text::split_ws(value);
        if (toks.size() == 1 && toks[0] == "*")
          b.spec.applicable_anywhere = true;
        else if (toks.size() == 2)
          b.inits.push_back({line.number, std::string(toks[0]), std::string(toks[1])});
        else
          throw ParseError(line.number, "init needs '*' or '<option> <signal>'");
      } else {
        throw ParseError(line.number, "unknown option directive '" + std::string(key) + "'");
      }
    }

    OptionSet set;
    set.agents.resize(model_.num_agents());
    for (auto& b : blocks_) finish(b);
    for (auto& b : blocks_) set.agents[b.spec.agent].push_back(b.spec);
    for (auto& b : blocks_) {
      auto& spec = set.agents[b.spec.agent][*set.find(b.spec.agent, b.spec.name)];
      for (const auto& init : b.inits) {
        auto pred = set.find(b.spec.agent, init.predecessor);
        if (!pred) throw ParseError(init.line, "unknown predecessor option '" + init.predecessor + "'");
        auto sig = find_signal(set.at(b.spec.agent, *pred), init.label);
        if (!sig)
          throw ParseError(init.line, fmt::format("option '{}' has no signal '{}'", init.predecessor, init.label));
        spec.initiation.emplace_back(*pred, *sig);
      }
    }
    auto violations = validate_options(model_, set);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return set;
  }

 private:
  void open_block(const text::Line& line) {
    auto toks = text::split_ws(line.content);
    if (toks.size() < 2) throw ParseError(line.number, "option needs a name");
    Block b;
    b.line = line.number;
    b.spec.name = std::string(toks[1]);
    bool have_agent = false;
    for (std::size_t k = 2; k < toks.size(); ++k) {
      auto eq = toks[k].find('=');
      if (eq == std::string_view::npos) throw ParseError(line.number, "expected key=value, got '" + std::string(toks[k]) + "'");
      auto key = toks[k].substr(0, eq);
      auto val = toks[k].substr(eq + 1);
      long v = text::to_int(val, line.number);
      if (key == "agent") {
        if (v < 0 || static_cast<std::size_t>(v) >= model_.num_agents())
          throw ParseError(line.number, fmt::format("agent {} out of range", v));
        b.spec.agent = static_cast<std::size_t>(v);
        have_agent = true;
      } else if (key == "root") {
        b.spec.root_applicable = v != 0;
      } else if (key == "min_dur") {
        if (v < 1) throw ParseError(line.number, "min_dur must be >= 1");
        b.spec.min_duration = static_cast<int>(v);
      } else {
        throw ParseError(line.number, "unknown option attribute '" + std::string(key) + "'");
      }
    }
    if (!have_agent) throw ParseError(line.number, "option needs agent=<i>");
    for (const auto& other : blocks_)
      if (other.spec.agent == b.spec.agent && other.spec.name == b.spec.name)
        throw ParseError(line.number, "duplicate option '" + b.spec.name + "'");
    blocks_.push_back(std::move(b));
  }

  std::size_t observation(std::size_t agent, std::string_view name, bool allow_start, std::size_t line) const {
    if (name == "*") return kWildcard;
    if (allow_start && name == "START") return model_.num_observations(agent);
    auto o = model_.find_observation(agent, name);
    if (!o) throw ParseError(line, fmt::format("unknown observation '{}' for agent {}", name, agent));
    return *o;
  }

  void read_pi(Block& b, std::string_view value, std::size_t line) {
    auto fields = text::split(value, ':');
    if (fields.size() != 2) throw ParseError(line, "pi needs '<obs|START|*> : <action> <prob>'");
    auto row = observation(b.spec.agent, fields[0], true, line);
    auto toks = text::split_ws(fields[1]);
    if (toks.size() != 2) throw ParseError(line, "pi needs '<action> <prob>'");
    auto a = model_.find_action(b.spec.agent, toks[0]);
    if (!a) throw ParseError(line, fmt::format("unknown action '{}' for agent {}", toks[0], b.spec.agent));
    auto& entries = b.pi[row];
    for (const auto& e : entries)
      if (e.index == *a) throw ParseError(line, "duplicate pi entry");
    entries.push_back({*a, text::to_double(toks[1], line)});
  }

  void finish(Block& b) {
    auto& spec = b.spec;
    const std::size_t nobs = model_.num_observations(spec.agent);
    spec.policy.assign(nobs + 1, {});
    for (std::size_t o = 0; o <= nobs; ++o) {
      auto it = b.pi.find(o);
      if (it == b.pi.end()) it = b.pi.find(kWildcard);
      if (it == b.pi.end())
        throw ParseError(b.line, fmt::format("option '{}' has no pi row for {}", spec.name,
                                             o == nobs ? std::string("START") : model_.observation_names(spec.agent)[o]));
      spec.policy[o] = make_dist(it->second);
    }
    spec.termination.assign(nobs, 0.0);
    spec.signal_of.assign(nobs, kNoSignal);
    for (std::size_t o = 0; o < nobs; ++o) {
      auto bt = b.beta.find(o);
      if (bt == b.beta.end()) bt = b.beta.find(kWildcard);
      if (bt != b.beta.end()) spec.termination[o] = bt->second;
      auto st = b.signal.find(o);
      if (st == b.signal.end()) st = b.signal.find(kWildcard);
      if (st != b.signal.end()) {
        auto k = find_signal(spec, st->second);
        if (!k) throw ParseError(b.line, fmt::format("option '{}' uses undeclared signal '{}'", spec.name, st->second));
        spec.signal_of[o] = *k;
      }
    }
  }

  const ModelSpec& model_;
  std::vector<text::Line> lines_;
  std::vector<Block> blocks_;
};

}  // namespace

OptionSet parse_options(const ModelSpec& model, std::string_view source) {
  return OptionsReader(model, source).read();
}

std::string emit_options(const ModelSpec& model, const OptionSet& options) {
  fmt::memory_buffer out;
  auto it = std::back_inserter(out);
  for (std::size_t i = 0; i < options.num_agents(); ++i) {
    const auto& obs = model.observation_names(i);
    const auto& acts = model.action_names(i);
    for (const auto& opt : options.agents[i]) {
      if (out.size()) fmt::format_to(it, "\n");
      fmt::format_to(it, "option {} agent={} root={} min_dur={}\n", opt.name, i, opt.root_applicable ? 1 : 0,
                     opt.min_duration);
      fmt::format_to(it, "signals:");
      for (const auto& s : opt.signals) fmt::format_to(it, " {}", s);
      fmt::format_to(it, "\n");
      for (std::size_t o = 0; o < opt.policy.size(); ++o)
        for (const auto& e : opt.policy[o])
          fmt::format_to(it, "pi: {} : {} {}\n", o == obs.size() ? std::string("START") : obs[o], acts[e.index], e.prob);
      for (std::size_t o = 0; o < opt.termination.size(); ++o)
        if (opt.termination[o] != 0.0) fmt::format_to(it, "beta: {} {}\n", obs[o], opt.termination[o]);
      for (std::size_t o = 0; o < opt.signal_of.size(); ++o)
        if (opt.signal_of[o] != kNoSignal) fmt::format_to(it, "signal: {} {}\n", obs[o], opt.signals[opt.signal_of[o]]);
      if (opt.applicable_anywhere) fmt::format_to(it, "init: *\n");
      for (const auto& [pred, sig] : opt.initiation)
        fmt::format_to(it, "init: {} {}\n", options.agents[i][pred].name, options.agents[i][pred].signals[sig]);
    }
  }
  return fmt::to_string(out);
}

OptionSet load_options(const ModelSpec& model, const std::string& path) {
  return parse_options(model, read_file(path));
}

}  // namespace macdec
