#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace macdec {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitCap = 2;

/// Everything needed to rerun a command. Written next to solver outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::map<std::string, std::string> input_hashes;  // path -> sha256
  std::uint64_t seed = 0;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
  std::vector<std::vector<std::size_t>> candidates;  // per iteration, per agent
};

nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);

/// Hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Entry point behind the `macdec` binary: gen, solve, eval, sim, export.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace macdec
