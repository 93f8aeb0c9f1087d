#include "macdec/options.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace macdec {

std::optional<std::size_t> OptionSet::find(std::size_t agent, std::string_view name) const {
  const auto& list = agents.at(agent);
  for (std::size_t m = 0; m < list.size(); ++m)
    if (list[m].name == name) return m;
  return std::nullopt;
}

bool applicable(const OptionSpec& option, Context context) {
  if (context.root) return option.root_applicable;
  if (option.applicable_anywhere) return true;
  return std::find(option.initiation.begin(), option.initiation.end(),
                   std::pair{context.predecessor, context.signal}) != option.initiation.end();
}

std::vector<std::size_t> successors(const OptionSet& options, std::size_t agent, std::size_t predecessor,
                                    std::size_t signal) {
  std::vector<std::size_t> out;
  const auto& list = options.agents.at(agent);
  for (std::size_t m = 0; m < list.size(); ++m)
    if (applicable(list[m], Context::after(predecessor, signal))) out.push_back(m);
  return out;
}

std::vector<std::size_t> root_options(const OptionSet& options, std::size_t agent) {
  std::vector<std::size_t> out;
  const auto& list = options.agents.at(agent);
  for (std::size_t m = 0; m < list.size(); ++m)
    if (list[m].root_applicable) out.push_back(m);
  return out;
}

std::optional<std::size_t> find_signal(const OptionSpec& option, std::string_view label) {
  for (std::size_t k = 0; k < option.signals.size(); ++k)
    if (option.signals[k] == label) return k;
  return std::nullopt;
}

std::vector<Violation> validate_options(const ModelSpec& model, const OptionSet& options) {
  std::vector<Violation> out;
  if (options.num_agents() != model.num_agents()) {
    out.push_back({"options", fmt::format("option set covers {} agents, model has {}", options.num_agents(),
                                          model.num_agents())});
    return out;
  }
  for (std::size_t i = 0; i < options.num_agents(); ++i) {
    const auto& list = options.agents[i];
    const std::size_t nobs = model.num_observations(i);
    const std::size_t nact = model.num_actions(i);
    if (list.empty()) out.push_back({fmt::format("agent {}", i), "agent has no options"});
    if (root_options(options, i).empty())
      out.push_back({fmt::format("agent {}", i), "agent has no root-applicable option"});
    for (std::size_t m = 0; m < list.size(); ++m) {
      const auto& opt = list[m];
      const std::string where = fmt::format("agent {} option {}", i, opt.name);
      for (std::size_t k = 0; k < m; ++k)
        if (list[k].name == opt.name) out.push_back({where, "duplicate option name"});
      if (opt.agent != i) out.push_back({where, fmt::format("option declares agent {}", opt.agent)});
      if (opt.min_duration < 1) out.push_back({where, "min_duration must be >= 1", double(opt.min_duration)});
      if (opt.signals.empty()) out.push_back({where, "empty signal alphabet"});
      if (opt.policy.size() != nobs + 1) {
        out.push_back({where, "policy needs one row per observation plus START",
                       double(opt.policy.size()) - double(nobs + 1)});
      } else {
        for (std::size_t o = 0; o <= nobs; ++o) {
          const std::string row =
              fmt::format("{} pi({})", where, o == nobs ? std::string("START") : model.observation_names(i)[o]);
          double sum = 0.0;
          for (const auto& e : opt.policy[o]) {
            if (e.index >= nact) out.push_back({row, fmt::format("action index {} out of range", e.index)});
            if (e.prob < 0.0 || !std::isfinite(e.prob))
              out.push_back({row, "negative or non-finite probability", e.prob});
            sum += e.prob;
          }
          if (std::abs(sum - 1.0) > kProbTolerance) out.push_back({row, "row does not sum to 1", sum - 1.0});
        }
      }
      if (opt.termination.size() != nobs || opt.signal_of.size() != nobs) {
        out.push_back({where, "termination and signal maps need one entry per observation"});
        continue;
      }
      bool can_end = false;
      for (std::size_t o = 0; o < nobs; ++o) {
        const double b = opt.termination[o];
        const std::string at = fmt::format("{} beta({})", where, model.observation_names(i)[o]);
        if (!(b >= 0.0 && b <= 1.0)) out.push_back({at, "termination probability outside [0, 1]", b});
        if (b > 0.0) {
          can_end = true;
          if (opt.signal_of[o] == kNoSignal || opt.signal_of[o] >= opt.signals.size())
            out.push_back({at, "terminating observation has no signal"});
        }
      }
      if (!can_end) out.push_back({where, "termination is identically 0"});
      for (const auto& [pred, sig] : opt.initiation) {
        if (pred >= list.size() || sig >= list[pred].signals.size())
          out.push_back({where, fmt::format("initiation refers to missing ({}, {})", pred, sig)});
      }
      for (std::size_t s = 0; s < opt.signals.size(); ++s)
        if (successors(options, i, m, s).empty())
          out.push_back({fmt::format("{} signal {}", where, opt.signals[s]), "no applicable successor option"});
    }
  }
  return out;
}

}  // namespace macdec
