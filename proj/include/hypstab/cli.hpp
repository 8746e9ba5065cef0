#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypstab/error.hpp"
#include "hypstab/relaxed.hpp"
#include "hypstab/simulator.hpp"
#include "hypstab/stability.hpp"
#include "hypstab/symmetrizer.hpp"

namespace hypstab {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed configuration: JSON syntax (with line and column) or a bad field (with its path).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct AnalysisSettings {
  int lattice_radius = 32;
  int sphere_samples = 64;
  std::optional<double> delta;  // defaults to problem.delta
  double tol = 1e-9;
  std::string mode = "auto";    // auto | standard | relaxed
  bool real_omega = false;
  SampleBox box;
};

struct SymmetrizerSettings {
  std::optional<double> cutoff;  // "auto" when empty
  int lattice_radius = 32;       // raised to cover the simulation grid
  std::optional<AsymptoticRoute> route;
};

struct SimulationSettings {
  SimConfig config;
  std::vector<std::string> initial;  // one expression in x1..xs per component
  std::string H = "table";           // table | frozen | identity
  double margin = 0.05;
};

struct OutputSettings {
  std::string directory = "hypstab_out";
  bool csv = true;
  bool json = true;
  bool table = true;
};

struct RunConfig {
  SystemSpec spec;
  AnalysisSettings analysis;
  SymmetrizerSettings symmetrizer;
  SimulationSettings simulation;
  OutputSettings output;
  std::string canonical;  // compact JSON of the parsed document
  std::uint64_t hash = 0;

  [[nodiscard]] double delta() const { return analysis.delta.value_or(spec.delta_candidate); }
};

/// Unknown keys are rejected.
[[nodiscard]] RunConfig parse_config(std::string_view text);
[[nodiscard]] RunConfig load_config(const std::string& path);

[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes);
[[nodiscard]] std::string hex64(std::uint64_t v);

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool real_omega = false;
};

struct AnalysisResult {
  HyperbolicityReport hyperbolicity;
  ConditionReport condition;
  MultiplicityReport multiplicity;
  bool multiplicity_required = false;  // eps > 0 with a perturbation
  bool relaxed = false;
  double delta = 0.0;
  bool pass = false;
};

[[nodiscard]] AnalysisResult analyze(const RunConfig& cfg, const RunOptions& opts);

/// Exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;
inline constexpr int kExitBlowup = 3;

/// Each command prints a summary to `out` and writes its files under the output directory.
int cmd_analyze(const RunConfig& cfg, const RunOptions& opts, std::ostream& out);
int cmd_symmetrize(const RunConfig& cfg, const RunOptions& opts, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, const RunOptions& opts, std::ostream& out);
int cmd_all(const RunConfig& cfg, const RunOptions& opts, std::ostream& out);

}  // namespace hypstab
