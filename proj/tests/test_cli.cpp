#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "macdec/cli.hpp"
#include "macdec/domains/toys.hpp"
#include "macdec/model_io.hpp"
#include "oracle.hpp"

using namespace macdec;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "macdec");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* base = std::getenv("MACDEC_TMP");
  fs::path p = fs::path(base ? base : fs::temp_directory_path().string()) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path gen_toy_files(const std::string& toy) {
  auto dir = scratch("gen-" + toy);
  write_file((dir / "cfg.txt").string(), "toy: " + toy + "\n");
  auto r = run({"gen", (dir / "cfg.txt").string(), "-o", dir.string()});
  REQUIRE(r.code == kExitOk);
  return dir;
}

}  // namespace

TEST_CASE("gen writes model, options and manifest") {
  auto dir = gen_toy_files("coin-coord");
  CHECK(fs::exists(dir / "model.dec"));
  CHECK(fs::exists(dir / "options.opt"));
  auto manifest = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
  CHECK(manifest["command"] == "gen");
  CHECK(manifest["inputs"].size() == 1);
  CHECK(manifest["outputs"].size() == 2);
  CHECK(parse_model(read_file((dir / "model.dec").string())) == gen_toy("coin-coord").model);

  auto wdir = scratch("gen-warehouse");
  write_file((wdir / "cfg.txt").string(), "layout: ring4\nbox: small depot1\nbox: large depot2\n");
  auto r = run({"gen", (wdir / "cfg.txt").string(), "-o", wdir.string(), "--json"});
  REQUIRE(r.code == kExitOk);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["domain"] == "warehouse-s1");
  CHECK(j["states"] == 192);
  CHECK(fs::exists(wdir / "config.txt"));
}

TEST_CASE("solve prints the oracle value and is reproducible") {
  auto dir = gen_toy_files("coin-coord");
  auto d = gen_toy("coin-coord");
  const double want = oracle::brute_force(d.model, d.options, 2, 2).value;
  auto model = (dir / "model.dec").string(), options = (dir / "options.opt").string();
  auto a = run({"solve", model, options, "--algo", "odp", "--horizon", "2", "-o", (dir / "a").string(), "--json"});
  REQUIRE(a.code == kExitOk);
  CHECK(nlohmann::json::parse(a.out)["value"].get<double>() == doctest::Approx(want).epsilon(1e-9));
  auto b = run({"solve", model, options, "--algo", "odp", "--horizon", "2", "-o", (dir / "b").string(), "--json"});
  REQUIRE(b.code == kExitOk);
  for (const char* f : {"policy.json", "report.json"})
    CHECK(read_file((dir / "a" / f).string()) == read_file((dir / "b" / f).string()));
  auto manifest = nlohmann::json::parse(read_file((dir / "a" / "manifest.json").string()));
  CHECK(manifest["parameters"]["algo"] == "odp");
  CHECK(manifest["inputs"].size() == 2);
  CHECK(!manifest["candidates"].empty());

  for (const char* sub : {"m1", "m2"}) {
    auto r = run({"solve", model, options, "--algo", "ombdp", "--max-trees", "1", "--seed", "3", "-o",
                  (dir / sub).string()});
    REQUIRE(r.code == kExitOk);
  }
  CHECK(read_file((dir / "m1" / "policy.json").string()) == read_file((dir / "m2" / "policy.json").string()));
}

TEST_CASE("eval exact and Monte Carlo agree") {
  auto dir = gen_toy_files("chain-cooperate");
  auto model = (dir / "model.dec").string(), options = (dir / "options.opt").string();
  REQUIRE(run({"solve", model, options, "-o", (dir / "s").string()}).code == kExitOk);
  auto policy = (dir / "s" / "policy.json").string();
  auto exact = run({"eval", model, options, policy, "--exact", "--json"});
  auto mc = run({"eval", model, options, policy, "--mc", "100000", "--seed", "4", "--json"});
  REQUIRE(exact.code == kExitOk);
  REQUIRE(mc.code == kExitOk);
  const double v = nlohmann::json::parse(exact.out)["exact"]["value"];
  auto est = nlohmann::json::parse(mc.out)["mc"];
  CHECK(std::abs(est["mean"].get<double>() - v) <= 3.0 * est["stderr"].get<double>());

  auto sim = run({"sim", model, options, policy, "--episodes", "20", "--trace", (dir / "t.jsonl").string(), "--json"});
  REQUIRE(sim.code == kExitOk);
  CHECK(nlohmann::json::parse(sim.out)["episodes"] == 20);
  auto trace = read_file((dir / "t.jsonl").string());
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 20 * 4);
}

TEST_CASE("export of a leaf policy is a one-node graph") {
  auto dir = scratch("export");
  auto policy = (dir / "leaf.json").string();
  write_file(policy, R"({"agents": [{"option": "listen"}, {"option": "call_heads"}]})");
  auto r = run({"export", policy, "--format", "dot", "-o", (dir / "out").string()});
  REQUIRE(r.code == kExitOk);
  auto dot = read_file((dir / "out" / "agent0.dot").string());
  CHECK(dot.find("n0") != std::string::npos);
  CHECK(dot.find("n1") == std::string::npos);
  CHECK(dot.find("->") == std::string::npos);
  auto json = run({"export", policy, "--format", "json"});
  REQUIRE(json.code == kExitOk);
  CHECK(json.out.find("\"nodes\"") != std::string::npos);
}

TEST_CASE("exit codes") {
  auto dir = gen_toy_files("fig3-shape");
  auto model = (dir / "model.dec").string(), options = (dir / "options.opt").string();

  auto bad = (dir / "bad.dec").string();
  auto text = read_file(model);
  write_file(bad, text.substr(0, text.find("T:")) + "T: a : s1 : nowhere 1\n");
  auto r = run({"solve", bad, options, "-o", (dir / "x").string()});
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.find("bad.dec") != std::string::npos);
  CHECK(r.err.find("line") != std::string::npos);

  auto capped = run({"solve", model, options, "--cap", "100", "-o", (dir / "y").string()});
  CHECK(capped.code == kExitCap);
  CHECK(capped.err.find("1728") != std::string::npos);

  CHECK(run({"solve", model, options, "--horizon", "-2", "-o", (dir / "z").string()}).code == kExitInvalid);
  CHECK(run({"frobnicate"}).code == kExitInvalid);
  CHECK(run({"eval", model, options, (dir / "missing.json").string()}).code == kExitInvalid);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
