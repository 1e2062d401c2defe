#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mcfs/cli.hpp"
#include "mcfs/io.hpp"

using namespace mcfs;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mcfs_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("lyapunov prints N") {
  const auto r = run({"lyapunov", "--x", "1,-1,1,-1"});
  CHECK(r.code == 0);
  CHECK(r.out == "N=3\n");
  const auto z = run({"lyapunov", "--x", "1,0,0,0"});
  CHECK(z.out == "N_m=1 N_M=3\n");
  CHECK(run({"lyapunov", "--x", "1,a"}).code == 2);
  CHECK(run({"lyapunov"}).code == 2);
}

TEST_CASE("split of the reference matrix") {
  const auto dir = scratch("split");
  const auto r = run({"split", "--reference", "7", "--t", "1.0", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto rep = io::read_json(dir / "report.json");
  REQUIRE(rep.at("blocks").size() == 4);
  for (std::size_t h = 0; h + 1 < 4; ++h) {
    CHECK(rep["blocks"][h]["nu"].get<double>() > rep["blocks"][h + 1]["mu"].get<double>());
  }
  CHECK(fs::exists(dir / "metadata.json"));
  CHECK(fs::exists(dir / "spectrum.csv"));
  CHECK(run({"split", "--t", "1.0", "--out", dir.string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("verify-cones reports zero violations") {
  const auto dir = scratch("cones");
  const auto r = run({"verify-cones", "--seed", "7", "--n", "5", "--h", "1", "--samples", "1000", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(io::read_json(dir / "report.json")["cones"]["violations"] == 0);
  CHECK(run({"verify-cones", "--n", "5", "--h", "9", "--out", dir.string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("identical config and seed give byte-identical reports") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto cfg = scratch("det_cfg.json");
  io::write_json(cfg, io::Json{{"n", 4}, {"h", 2}, {"samples", 300}, {"t", 0.5}, {"seed", 11}});
  CHECK(run({"verify-cones", "--config", cfg.string(), "--out", a.string()}).code == 0);
  CHECK(run({"verify-cones", "--config", cfg.string(), "--out", b.string()}).code == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(io::read_json(a / "report.json")["cones"]["h"] == 2);
  // Command-line flags override the config file.
  CHECK(run({"verify-cones", "--config", cfg.string(), "--h", "1", "--out", b.string()}).code == 0);
  CHECK(io::read_json(b / "report.json")["cones"]["h"] == 1);
  for (const auto& p : {a, b, cfg}) fs::remove_all(p);
}

TEST_CASE("unknown config keys are rejected") {
  const auto cfg = scratch("bad_cfg.json");
  io::write_json(cfg, io::Json{{"bogus", 1}});
  CHECK(run({"verify-cones", "--config", cfg.string()}).code == 2);
  CHECK(run({"verify-cones", "--config", (cfg.string() + ".missing")}).code == 2);
  fs::remove_all(cfg);
}

TEST_CASE("verify-monotone and simulate write series") {
  const auto dir = scratch("mono");
  CHECK(run({"verify-monotone", "--n", "5", "--systems", "3", "--seed", "2", "--out", dir.string()}).code == 0);
  CHECK(fs::exists(dir / "n_series.csv"));
  CHECK(run({"simulate", "--t1", "20", "--out", dir.string()}).code == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(run({"simulate", "--model", R"({"name": "goodwin", "params": {"n": 3, "p": -1, "b": 0.4}})", "--out",
             dir.string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("floquet and transversality on the default model") {
  const auto dir = scratch("orbit");
  const auto f = run({"floquet", "--out", dir.string()});
  CHECK(f.code == 0);
  CHECK(fs::exists(dir / "multipliers.csv"));
  const auto t = run({"transversality", "--out", dir.string()});
  CHECK(t.code == 0);
  CHECK(t.out.find("verdict=transversal") != std::string::npos);
  const auto rep = io::read_json(dir / "report.json");
  CHECK(rep["transversality"]["verdict"] == "transversal");
  CHECK(rep["difference_signature"]["violations"] == 0);
  CHECK(fs::exists(dir / "sigma.csv"));
  fs::remove_all(dir);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}
