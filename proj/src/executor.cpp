#include "macdec/executor.hpp"

#include <fmt/format.h>

#include <functional>
#include <stdexcept>

namespace macdec {

using json = nlohmann::ordered_json;

EpisodeTrace run_episode(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                         std::uint64_t seed, std::size_t episode) {
  if (h <= 0) throw std::invalid_argument(fmt::format("horizon must be positive, got {}", h));
  auto controllers = make_controllers(model, options, policy);
  return run_seeded_episode(model, controllers, h, seed, episode, true);
}

std::vector<std::size_t> replay_agent(const ModelSpec& model, const OptionSet& options, std::size_t agent,
                                      std::shared_ptr<const FlatTree> tree, const EpisodeTrace& trace) {
  AgentController c(model, options, agent, std::move(tree));
  auto streams = EpisodeStreams::derive(trace.seed, trace.episode, model.num_agents());
  Rng& rng = streams.agents.at(agent);
  std::vector<std::size_t> actions;
  const int h = static_cast<int>(trace.steps.size());
  for (const auto& step : trace.steps) {
    actions.push_back(c.act(rng));
    c.observe(step.agents.at(agent).observation, step.t == h - 1, rng);
  }
  return actions;
}

BatchStats batch_stats(const ModelSpec& model, const OptionSet& options, const JointPolicy& policy, int h,
                       std::size_t n, std::uint64_t seed, const TraceAnalyzer& analyzer,
                       const std::function<void(const EpisodeTrace&)>& each) {
  if (n == 0) throw std::invalid_argument("need at least one episode");
  if (h <= 0) throw std::invalid_argument(fmt::format("horizon must be positive, got {}", h));
  auto controllers = make_controllers(model, options, policy);
  BatchStats out;
  out.episodes = n;
  for (std::size_t i = 0; i < options.num_agents(); ++i) out.option_starts.emplace_back(options.agents[i].size(), 0);
  std::vector<double> returns(n);
  for (std::size_t e = 0; e < n; ++e) {
    auto tr = run_seeded_episode(model, controllers, h, seed, e, true);
    returns[e] = tr.ret;
    out.falloff_episodes += tr.fell_off ? 1 : 0;
    for (std::size_t k = 0; k < tr.steps.size(); ++k)
      for (std::size_t i = 0; i < tr.steps[k].agents.size(); ++i) {
        const auto& a = tr.steps[k].agents[i];
        const bool starts = k == 0 || tr.steps[k - 1].agents[i].terminated;
        if (starts) ++out.option_starts[i][a.option];
      }
    if (analyzer)
      for (const auto& [key, v] : analyzer(tr)) out.events[key] += v;
    if (each) each(tr);
  }
  out.returns = summarize(returns);
  return out;
}

std::string trace_to_jsonl(const ModelSpec& model, const OptionSet& options, const EpisodeTrace& trace) {
  std::string out;
  for (const auto& s : trace.steps) {
    json j;
    j["episode"] = trace.episode;
    j["t"] = s.t;
    j["state"] = model.state_names()[s.state];
    j["action"] = model.joint_action_label(s.joint_action);
    j["observation"] = model.joint_observation_label(s.joint_observation);
    j["next_state"] = model.state_names()[s.next_state];
    j["reward"] = s.reward;
    json agents = json::array();
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const auto& a = s.agents[i];
      const auto& spec = options.at(i, a.option);
      json ja;
      ja["option"] = spec.name;
      ja["action"] = model.action_names(i)[a.action];
      ja["observation"] = model.observation_names(i)[a.observation];
      ja["terminated"] = a.terminated;
      if (a.terminated) ja["signal"] = spec.signals.at(a.signal);
      if (a.fell_off) ja["fell_off"] = true;
      agents.push_back(std::move(ja));
    }
    j["agents"] = std::move(agents);
    out += j.dump() + "\n";
  }
  json summary;
  summary["episode"] = trace.episode;
  summary["return"] = trace.ret;
  summary["steps"] = trace.steps.size();
  summary["fell_off"] = trace.fell_off;
  out += summary.dump() + "\n";
  return out;
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "dot") return ExportFormat::Dot;
  if (name == "json") return ExportFormat::Json;
  throw std::invalid_argument("unknown export format '" + std::string(name) + "'");
}

Automaton to_automaton(const NamedTree& tree, std::size_t agent) {
  Automaton a;
  a.agent = agent;
  std::function<std::size_t(const NamedTree&)> visit = [&](const NamedTree& t) {
    const std::size_t id = a.nodes.size();
    a.nodes.push_back(t.option);
    for (const auto& [label, child] : t.children) {
      const std::size_t to = visit(child);
      a.edges.push_back({id, to, label});
    }
    return id;
  };
  visit(tree);
  return a;
}

NamedTree from_automaton(const Automaton& a) {
  if (a.initial >= a.nodes.size()) throw PolicyError("automaton initial node out of range");
  std::vector<std::vector<const Automaton::Edge*>> out(a.nodes.size());
  std::vector<int> indegree(a.nodes.size(), 0);
  for (const auto& e : a.edges) {
    if (e.from >= a.nodes.size() || e.to >= a.nodes.size()) throw PolicyError("automaton edge out of range");
    out[e.from].push_back(&e);
    ++indegree[e.to];
  }
  for (std::size_t k = 0; k < a.nodes.size(); ++k)
    if (indegree[k] != (k == a.initial ? 0 : 1)) throw PolicyError("automaton is not a tree rooted at its initial node");
  std::vector<char> seen(a.nodes.size(), 0);
  std::function<NamedTree(std::size_t)> build = [&](std::size_t k) {
    if (seen[k]) throw PolicyError("automaton has a cycle");
    seen[k] = 1;
    NamedTree t{a.nodes[k], {}};
    for (const auto* e : out[k]) t.children.emplace_back(e->signal, build(e->to));
    return t;
  };
  auto t = build(a.initial);
  for (char s : seen)
    if (!s) throw PolicyError("automaton has unreachable nodes");
  return t;
}

json automaton_to_json(const Automaton& a) {
  json j;
  j["agent"] = a.agent;
  j["initial"] = a.initial;
  json nodes = json::array();
  for (std::size_t k = 0; k < a.nodes.size(); ++k) nodes.push_back({{"id", k}, {"option", a.nodes[k]}});
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& e : a.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"signal", e.signal}});
  j["edges"] = std::move(edges);
  return j;
}

Automaton automaton_from_json(const json& j) {
  try {
    Automaton a;
    a.agent = j.at("agent").get<std::size_t>();
    a.initial = j.at("initial").get<std::size_t>();
    for (const auto& n : j.at("nodes")) {
      if (n.at("id").get<std::size_t>() != a.nodes.size()) throw PolicyError("automaton node ids must be 0..n-1 in order");
      a.nodes.push_back(n.at("option").get<std::string>());
    }
    for (const auto& e : j.at("edges"))
      a.edges.push_back({e.at("from").get<std::size_t>(), e.at("to").get<std::size_t>(), e.at("signal").get<std::string>()});
    return a;
  } catch (const json::exception& e) {
    throw PolicyError(std::string("automaton JSON: ") + e.what());
  }
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_controller(const NamedTree& tree, std::size_t agent, ExportFormat format) {
  const auto a = to_automaton(tree, agent);
  if (format == ExportFormat::Json) return automaton_to_json(a).dump(2) + "\n";
  std::string out = fmt::format("digraph agent{} {{\n  rankdir=TB;\n", agent);
  for (std::size_t k = 0; k < a.nodes.size(); ++k)
    out += fmt::format("  n{} [label=\"{}\", shape={}];\n", k, dot_escape(a.nodes[k]),
                       k == a.initial ? "doublecircle" : "circle");
  for (const auto& e : a.edges) out += fmt::format("  n{} -> n{} [label=\"{}\"];\n", e.from, e.to, dot_escape(e.signal));
  out += "}\n";
  return out;
}

std::string export_controller(const OptionSet& options, std::size_t agent, const Tree& tree, ExportFormat format) {
  return export_controller(to_named(options, agent, tree), agent, format);
}

NamedTree import_controller(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PolicyError(std::string("automaton JSON: ") + e.what());
  }
  return from_automaton(automaton_from_json(j));
}

FlatTree flat_from_automaton(const OptionSet& options, const Automaton& a) {
  from_automaton(a);  // shape check
  if (a.agent >= options.num_agents()) throw PolicyError(fmt::format("no agent {}", a.agent));
  // renumber so the initial node is 0
  std::vector<std::uint32_t> id(a.nodes.size());
  for (std::size_t k = 0, next = 1; k < a.nodes.size(); ++k) id[k] = k == a.initial ? 0 : next++;
  FlatTree f;
  f.option.resize(a.nodes.size());
  f.child.resize(a.nodes.size());
  for (std::size_t k = 0; k < a.nodes.size(); ++k) {
    auto m = options.find(a.agent, a.nodes[k]);
    if (!m) throw PolicyError(fmt::format("agent {} has no option '{}'", a.agent, a.nodes[k]));
    f.option[id[k]] = *m;
    f.child[id[k]].assign(options.at(a.agent, *m).signals.size(), FlatTree::kNone);
  }
  for (const auto& e : a.edges) {
    const auto& spec = options.at(a.agent, f.option[id[e.from]]);
    auto s = find_signal(spec, e.signal);
    if (!s) throw PolicyError(fmt::format("option '{}' has no signal '{}'", spec.name, e.signal));
    f.child[id[e.from]][*s] = id[e.to];
  }
  return f;
}

}  // namespace macdec
