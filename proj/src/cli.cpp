#include "macdec/cli.hpp"

#include <openssl/evp.h>
#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <ostream>

#include "macdec/dp_solver.hpp"
#include "macdec/domains/warehouse.hpp"
#include "macdec/evaluate.hpp"
#include "macdec/executor.hpp"
#include "macdec/mbdp_solver.hpp"
#include "macdec/model_io.hpp"
#include "macdec/options_io.hpp"
#include "macdec/policy_io.hpp"

namespace macdec {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

ordered_json manifest_to_json(const RunManifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["args"] = m.args;
  j["inputs"] = ordered_json::object();
  for (const auto& [path, hash] : m.input_hashes) j["inputs"][path] = {{"sha256", hash}};
  j["seed"] = m.seed;
  j["parameters"] = m.parameters;
  j["outputs"] = m.outputs;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["candidates"] = m.candidates;
  return j;
}

namespace {

// A failure that already carries file context.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto with_file(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const PolicyError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct Inputs {
  RunManifest* manifest;
  std::string load(const std::string& path) {
    auto text = read_file(path);
    manifest->input_hashes[path] = sha256_hex(text);
    return text;
  }
  ModelSpec model(const std::string& path) {
    auto text = load(path);
    return with_file(path, [&] { return parse_model(text); });
  }
  OptionSet options(const ModelSpec& m, const std::string& path) {
    auto text = load(path);
    return with_file(path, [&] { return parse_options(m, text); });
  }
  JointPolicy policy(const OptionSet& o, const std::string& path) {
    auto text = load(path);
    return with_file(path, [&] { return parse_policy(o, text); });
  }
};

int resolve_horizon(const ModelSpec& m, int flag) {
  if (flag > 0) return flag;
  if (flag < 0) throw std::invalid_argument("horizon must be positive");
  if (!m.horizon()) throw std::invalid_argument("model horizon is infinite; pass --horizon");
  return *m.horizon();
}

ordered_json report_to_json(const ModelSpec& m, const ValueReport& r) {
  ordered_json j;
  j["horizon"] = r.horizon;
  j["value"] = r.value;
  j["falloff_mass"] = r.falloff_mass;
  j["max_mass_error"] = r.max_mass_error;
  j["depth_mass"] = r.depth_mass;
  j["start_values"] = ordered_json::array();
  for (auto [s, v] : r.start_values) j["start_values"].push_back({{"state", m.state_names()[s]}, {"value", v}});
  j["node_counts"] = r.node_counts;
  j["unreached_nodes"] = r.unreached_nodes;
  j["max_layer"] = r.max_layer;
  if (r.truncation_bound) j["truncation_bound"] = *r.truncation_bound;
  return j;
}

ordered_json iterations_to_json(const std::vector<IterationStats>& its) {
  ordered_json a = ordered_json::array();
  for (const auto& it : its)
    a.push_back({{"iteration", it.iteration},
                 {"candidates", it.candidates},
                 {"retained", it.retained},
                 {"joint_pending", it.joint_pending},
                 {"some_too_short", it.some_too_short}});
  return a;
}

void write_output(RunManifest& manifest, const fs::path& path, std::string_view text) {
  write_file(path.string(), text);
  manifest.outputs.push_back(path.string());
}

struct Common {
  bool json = false;
  std::uint64_t seed = 0;
  int horizon = 0;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  CLI::App app{"Option-based planning for decentralized teams"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common c;
  std::string model_path, options_path, policy_path, config_path, out_path, trace_path;

  auto* gen = app.add_subcommand("gen", "Generate model and options files from a domain config");
  gen->add_option("config", config_path, "Domain config file")->required();
  gen->add_option("-o,--out", out_path, "Output directory")->required();
  gen->add_flag("--json", c.json, "Machine-readable stdout");

  std::string algo = "odp", heuristic = "random-options";
  std::size_t max_trees = 3, restarts = 1, redraws = RetentionConfig{}.redraws, cap = Caps{}.max_trees, joint_cap = Caps{}.max_joint_evaluations;
  auto* solve = app.add_subcommand("solve", "Compute a joint option policy");
  solve->add_option("model", model_path)->required();
  solve->add_option("options", options_path)->required();
  solve->add_option("--algo", algo, "odp or ombdp")->check(CLI::IsMember({"odp", "ombdp"}));
  solve->add_option("--horizon", c.horizon, "Planning horizon (default: the model's)");
  solve->add_option("--max-trees", max_trees, "Trees kept per agent (ombdp; 0 keeps all)");
  solve->add_option("--heuristic", heuristic, "State-sampling heuristic (ombdp)");
  solve->add_option("--restarts", restarts, "Independent runs, best kept (ombdp)")->check(CLI::PositiveNumber);
  solve->add_option("--redraws", redraws, "Draws per sampled state (ombdp)")->check(CLI::PositiveNumber);
  solve->add_option("--config", config_path, "Warehouse config, enables its heuristics");
  solve->add_option("--seed", c.seed);
  solve->add_option("--cap", cap, "Candidate trees per agent per backup");
  solve->add_option("--joint-cap", joint_cap, "Joint evaluations");
  solve->add_option("-o,--out", out_path, "Output directory")->required();
  solve->add_flag("--json", c.json);

  bool exact = false;
  std::size_t mc = 0;
  auto* eval = app.add_subcommand("eval", "Value of a policy");
  eval->add_option("model", model_path)->required();
  eval->add_option("options", options_path)->required();
  eval->add_option("policy", policy_path)->required();
  eval->add_option("--horizon", c.horizon);
  auto* exact_flag = eval->add_flag("--exact", exact, "Exact evaluation (default)");
  eval->add_option("--mc", mc, "Monte Carlo samples")->excludes(exact_flag);
  eval->add_option("--seed", c.seed);
  eval->add_flag("--json", c.json);

  std::size_t episodes = 100;
  auto* sim = app.add_subcommand("sim", "Simulate decentralized execution");
  sim->add_option("model", model_path)->required();
  sim->add_option("options", options_path)->required();
  sim->add_option("policy", policy_path)->required();
  sim->add_option("--horizon", c.horizon);
  sim->add_option("--episodes", episodes);
  sim->add_option("--seed", c.seed);
  sim->add_option("--trace", trace_path, "JSONL trace output");
  sim->add_flag("--json", c.json);

  std::string format = "dot";
  auto* exp = app.add_subcommand("export", "Per-agent controllers as DOT or JSON");
  exp->add_option("policy", policy_path)->required();
  exp->add_option("--format", format)->check(CLI::IsMember({"dot", "json"}));
  exp->add_option("-o,--out", out_path, "Output directory (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    return kExitInvalid;
  }

  RunManifest manifest;
  manifest.command = app.get_subcommands().front()->get_name();
  for (int i = 1; i < argc; ++i) manifest.args.emplace_back(argv[i]);
  manifest.seed = c.seed;
  Inputs in{&manifest};

  try {
    if (*gen) {
      auto cfg = with_file(config_path, [&] { return parse_gen_config(in.load(config_path)); });
      auto dom = with_file(config_path, [&] { return generate(cfg); });
      fs::create_directories(out_path);
      write_output(manifest, fs::path(out_path) / "model.dec", emit_model(dom.model));
      write_output(manifest, fs::path(out_path) / "options.opt", emit_options(dom.model, dom.options));
      if (!cfg.toy) write_output(manifest, fs::path(out_path) / "config.txt", emit_warehouse_config(cfg.warehouse));
      manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_output(manifest, fs::path(out_path) / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
      if (c.json)
        out << ordered_json{{"domain", dom.name},
                            {"states", dom.model.num_states()},
                            {"agents", dom.model.num_agents()},
                            {"outputs", manifest.outputs}}
                   .dump()
            << "\n";
      else
        out << fmt::format("{}: {} states, {} agents -> {}\n", dom.name, dom.model.num_states(),
                           dom.model.num_agents(), out_path);
      return kExitOk;
    }

    if (*exp) {
      auto named = with_file(policy_path, [&] { return named_policy_from_json(ordered_json::parse(in.load(policy_path))); });
      const auto fmt_kind = parse_export_format(format);
      for (std::size_t i = 0; i < named.size(); ++i) {
        auto text = export_controller(named[i], i, fmt_kind);
        if (out_path.empty()) {
          out << text;
        } else {
          fs::create_directories(out_path);
          write_output(manifest, fs::path(out_path) / fmt::format("agent{}.{}", i, format), text);
        }
      }
      return kExitOk;
    }

    auto model = in.model(model_path);
    auto options = in.options(model, options_path);
    const int h = resolve_horizon(model, c.horizon);

    if (*solve) {
      Caps caps{cap, joint_cap};
      manifest.parameters = {{"algo", algo}, {"horizon", h}, {"cap", cap}, {"joint_cap", joint_cap}};
      SolveResult res;
      ordered_json extra = ordered_json::object();
      if (algo == "odp") {
        res = solve_odp(model, options, h, caps);
      } else {
        manifest.parameters["max_trees"] = max_trees;
        manifest.parameters["heuristic"] = heuristic;
        manifest.parameters["restarts"] = restarts;
        manifest.parameters["redraws"] = redraws;
        HeuristicRegistry registry;
        if (!config_path.empty()) {
          auto cfg = with_file(config_path, [&] { return parse_gen_config(in.load(config_path)); });
          if (!cfg.toy) register_warehouse_heuristics(registry, cfg.warehouse);
        }
        auto heur = registry.make(heuristic, model, options);
        RetentionConfig rc{max_trees, c.seed, heuristic, redraws, restarts};
        auto mres = solve_ombdp(model, options, h, rc, *heur, caps);
        extra["candidate_bound"] = ordered_json::array();
        for (const auto& d : mres.details) extra["candidate_bound"].push_back(d.candidate_bound);
        res = std::move(mres);
      }
      for (const auto& it : res.iterations) manifest.candidates.push_back(it.candidates);
      fs::create_directories(out_path);
      write_output(manifest, fs::path(out_path) / "policy.json", emit_policy(options, res.policy));
      auto report = report_to_json(model, res.report);
      report["algo"] = algo;
      report["joint_evaluations"] = res.joint_evaluations;
      report["iterations"] = iterations_to_json(res.iterations);
      for (auto& [k, v] : extra.items()) report[k] = v;
      write_output(manifest, fs::path(out_path) / "report.json", report.dump(2) + "\n");
      manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_output(manifest, fs::path(out_path) / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
      if (c.json)
        out << ordered_json{{"value", res.report.value}, {"horizon", h}, {"outputs", manifest.outputs}}.dump() << "\n";
      else
        out << fmt::format("value {} at horizon {}\n", res.report.value, h);
      return kExitOk;
    }

    auto policy = in.policy(options, policy_path);

    if (*eval) {
      ordered_json j{{"horizon", h}};
      if (mc > 0) {
        auto est = evaluate_mc(model, options, policy, h, mc, c.seed);
        j["mc"] = {{"mean", est.mean},
                   {"stderr", est.stderr_},
                   {"samples", est.samples},
                   {"falloff_episodes", est.falloff_episodes}};
        if (!c.json) out << fmt::format("mc {} +- {} ({} samples)\n", est.mean, est.stderr_, est.samples);
      } else {
        auto rep = evaluate_exact(model, options, policy, h);
        j["exact"] = report_to_json(model, rep);
        if (!c.json) out << fmt::format("exact {}\n", rep.value);
      }
      if (c.json) out << j.dump() << "\n";
      return kExitOk;
    }

    if (*sim) {
      std::string jsonl;
      auto stats = batch_stats(model, options, policy, h, episodes, c.seed, {}, [&](const EpisodeTrace& t) {
        if (!trace_path.empty()) jsonl += trace_to_jsonl(model, options, t);
      });
      if (!trace_path.empty()) write_output(manifest, trace_path, jsonl);
      ordered_json starts = ordered_json::array();
      for (std::size_t i = 0; i < stats.option_starts.size(); ++i) {
        ordered_json a = ordered_json::object();
        for (std::size_t m = 0; m < stats.option_starts[i].size(); ++m)
          a[options.at(i, m).name] = stats.option_starts[i][m];
        starts.push_back(a);
      }
      ordered_json j{{"episodes", stats.episodes},
                     {"mean_return", stats.returns.mean},
                     {"stderr", stats.returns.stderr_},
                     {"falloff_episodes", stats.falloff_episodes},
                     {"option_starts", starts}};
      if (c.json)
        out << j.dump() << "\n";
      else
        out << fmt::format("{} episodes, mean return {} +- {}, fall-offs {}\n", stats.episodes, stats.returns.mean,
                           stats.returns.stderr_, stats.falloff_episodes);
      return kExitOk;
    }
  } catch (const CapExceeded& e) {
    err << "cap exceeded: " << e.what() << "\n";
    return kExitCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace macdec
