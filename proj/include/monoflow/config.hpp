#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "monoflow/invariance.hpp"
#include "monoflow/lcs.hpp"
#include "monoflow/lyapunov.hpp"

namespace monoflow {

inline constexpr const char* kToolVersion = "0.1.0";

// a parsed and validated scenario; `tree` is the canonical structured form
// the hash and the round-trip serialization are computed from
struct ScenarioConfig {
  nlohmann::ordered_json tree;
  std::map<std::string, int> lines;  // "table.key" -> source line

  std::optional<SystemSpec> system;
  std::optional<LyapunovCandidate> candidate;
  std::optional<ConvexSet> region;
  std::optional<ConvexSet> invariant_set;
  std::optional<LCSSystem> lcs;

  double T = 1.0;
  double h = 1e-3;
  int samples = 100;
  uint64_t seed = 0;
  std::string variant;  // empty selects the per-command default
  std::optional<Vector> x0;
  double rho_bar = 1.0;
  double lambda_bar = 0.0;

  uint64_t hash = 0;
};

ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

// canonical rendering: fixed table and key order, full-precision numbers;
// parse(serialize(parse(t))) reproduces the same value and hash
std::string serialize_config(const ScenarioConfig& cfg);

// 64-bit FNV-1a over the canonical rendering
uint64_t config_hash(const ScenarioConfig& cfg);

struct RunOverrides {
  std::optional<uint64_t> seed;
  std::optional<double> h;
  std::optional<double> T;
};

// folds command-line overrides into the tree, re-validates the numerics,
// and refreshes the hash
void apply_overrides(ScenarioConfig& cfg, const RunOverrides& ov);

// command dispatch; writes artifacts under out_dir (filenames carry the
// config hash and are never overwritten) and returns the exit status:
// 0 certified/pass, 1 refuted, 2 inconclusive, 3 error
int run_command(const std::string& command, ScenarioConfig& cfg,
                const std::string& out_dir, std::ostream& log,
                std::ostream& err);

}  // namespace monoflow
