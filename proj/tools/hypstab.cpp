#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hypstab/cli.hpp"
#include "hypstab/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stability certificates for hyperbolic dissipative periodic systems"};
  app.set_version_flag("--version", std::string("hypstab ") + hypstab::kVersion);
  std::string command;
  std::string config_path;
  std::optional<std::string> out_dir;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  bool real_omega = false;
  app.add_option("command", command, "analyze | symmetrize | simulate | all")
      ->required()
      ->check(CLI::IsMember({"analyze", "symmetrize", "simulate", "all"}));
  app.add_option("--config", config_path, "problem config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  app.add_option("--threads", threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "seed for sampled states and probes");
  app.add_flag("--real-omega", real_omega, "also sweep non-integer frequencies");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hypstab::kExitError;
  }
  try {
    if (threads > 0) hypstab::set_thread_count(threads);
    const hypstab::RunConfig cfg = hypstab::load_config(config_path);
    hypstab::RunOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    opts.real_omega = real_omega;
    if (command == "analyze") return hypstab::cmd_analyze(cfg, opts, std::cout);
    if (command == "symmetrize") return hypstab::cmd_symmetrize(cfg, opts, std::cout);
    if (command == "simulate") return hypstab::cmd_simulate(cfg, opts, std::cout);
    return hypstab::cmd_all(cfg, opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hypstab::kExitError;
  }
}
