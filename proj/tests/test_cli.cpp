#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "hypstab/cli.hpp"

using namespace hypstab;

namespace {

const char* kDamped = R"json({"problem": {"A0": [[1.0]], "B0": [[-1.0]]},
  "simulation": {"N": 16, "T_final": 4.0, "initial": ["sin(x1)"]}, "output": {"formats": []}})json";

RunOptions scratch(const char* name) {
  RunOptions o;
  o.out_dir = (std::filesystem::temp_directory_path() / name).string();
  return o;
}

std::string error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("hash helpers") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(kDamped);
  CHECK(cfg.spec.s == 1);
  CHECK(cfg.spec.n == 1);
  CHECK(cfg.simulation.config.N == 16);
  CHECK(cfg.simulation.initial.size() == 1);
  CHECK_FALSE(cfg.output.csv);
  CHECK(cfg.delta() == 1.0);

  // whitespace and key order do not change the hash
  const RunConfig again = parse_config(R"json({"output": {"formats": []},
      "simulation": {"initial": ["sin(x1)"], "T_final": 4.0, "N": 16},
      "problem": {"B0": [[-1.0]], "A0": [[1.0]]}})json");
  CHECK(again.hash == cfg.hash);

  const RunConfig two = parse_config(R"json({"problem": {"A0": [[[1, 0], [0, 2]], [[0, 1], [1, 0]]],
      "B0": [[-1, 0], [0, -1]], "eps": 0.1, "A1": [[["x2", 0], [0, 0]], [[0, 0], [0, "u1"]]]}})json");
  CHECK(two.spec.s == 2);
  CHECK(two.spec.A1.size() == 2);
}

TEST_CASE("config diagnostics") {
  CHECK(error_of(R"json({"problem": {"A0": [[1]], "B0": [[-1]]}, "extra": 1})json").find("extra: unknown key") !=
        std::string::npos);
  CHECK(error_of(R"json({"problem": {"A0": [[1]], "B0": [["x"]]}})json").find("problem.B0[0][0]") !=
        std::string::npos);
  CHECK(error_of(R"json({"problem": {"A0": [[1]], "B0": [[-1]], "B1": [["sin("]]}})json").find("problem.B1") !=
        std::string::npos);
  CHECK(error_of(R"json({"problem": {"A0": [[1]], "B0": [[-1]]}, "simulation": {"N": 12}})json").find("power of two") !=
        std::string::npos);
  CHECK(error_of("{\"problem\": \n [").find("line 2") != std::string::npos);
  CHECK(error_of(R"json({"analysis": {}})json").find("problem: missing section") != std::string::npos);
  CHECK(error_of(R"json({"problem": {"A0": [[1]], "B0": [[-1]]}, "simulation": {"initial": ["1", "2"]}})json")
            .find("simulation.initial") != std::string::npos);
}

TEST_CASE("analysis verdicts agree with the stability module") {
  const RunConfig relaxed = parse_config(R"json({"problem": {"A0": [[0, 1], [1, 0]], "B0": [[-1, 0], [0, 0]],
      "eps": 0.05, "B1": [["cos(x1)", "0"], ["0.5", "0"]], "delta": 0.4}, "output": {"formats": []}})json");
  const AnalysisResult a = analyze(relaxed, {});
  CHECK(a.relaxed);
  CHECK(a.pass);
  const auto direct = check_relaxed_condition(relaxed.spec, 32, 0.4, sample_box(SampleBox{}, 1, 2, 0.05));
  CHECK(a.condition.r == direct.r);
  CHECK(a.condition.delta_star == direct.delta_star);

  std::ostringstream out;
  CHECK(cmd_analyze(relaxed, scratch("hypstab_cli_a"), out) == kExitPass);
  CHECK(out.str().find("mode: relaxed") != std::string::npos);

  const RunConfig zero = parse_config(R"json({"problem": {"A0": [[1]], "B0": [[0]]}, "output": {"formats": []}})json");
  CHECK(cmd_analyze(zero, scratch("hypstab_cli_b"), out) == kExitFail);
}

TEST_CASE("commands write their files") {
  RunConfig cfg = parse_config(kDamped);
  cfg.output.csv = cfg.output.json = cfg.output.table = true;
  const RunOptions o = scratch("hypstab_cli_c");
  std::filesystem::remove_all(*o.out_dir);
  std::ostringstream out;
  CHECK(cmd_all(cfg, o, out) == kExitPass);
  for (const char* f : {"analyze.json", "symmetrize.json", "symmetrizer.table", "simulate.csv", "simulate.json"}) {
    CHECK(std::filesystem::exists(std::filesystem::path(*o.out_dir) / f));
  }
  CHECK(out.str().find(hex64(cfg.hash)) != std::string::npos);
}
