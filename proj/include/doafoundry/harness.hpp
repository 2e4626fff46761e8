// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration, Monte Carlo orchestration and CSV output.
//
// A config is a JSON object:
//
//   {
//     "kind":   "had",          // detect | estimate | had | quantize-sweep |
//                               // coarray | localize | crlb | resolution
//     "seed":   42,             // required
//     "trials": 200,            // optional, per-kind default
//     "output": "out",          // optional directory, default "out"
//     "params": { ... }         // optional, per-kind fields (see kind_defaults)
//   }
//
// Unknown fields and type mismatches are rejected with the field name.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace doafoundry {

enum class ExperimentKind { Detect, Estimate, Had, QuantizeSweep, Coarray, Localize, Crlb, Resolution };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind kind_from_string(const std::string& name);
const std::vector<ExperimentKind>& all_kinds();

/// Default parameter object for a kind; also documents its schema.
nlohmann::json kind_defaults(ExperimentKind kind);
int default_trials(ExperimentKind kind);

struct ScenarioConfig {
  ExperimentKind kind = ExperimentKind::Detect;
  std::uint64_t seed = 0;
  int trials = 1;
  std::filesystem::path output_dir = "out";
  nlohmann::json params;  // defaults filled in, numbers normalized
};

/// Validates and fills defaults. `kind_override` (from the command line) must
/// agree with the file when both are present.
ScenarioConfig parse_config(const nlohmann::json& doc,
                            std::optional<ExperimentKind> kind_override = std::nullopt);
ScenarioConfig load_config(const std::filesystem::path& path,
                           std::optional<ExperimentKind> kind_override = std::nullopt);

/// 64-bit FNV-1a over the canonical dump of kind, seed, trials and params, as
/// 16 hex digits. The output directory is not part of the hash.
std::string config_hash(const ScenarioConfig& cfg);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::vector<std::pair<std::string, std::string>> headline;
};

RunSummary run_experiment(const ScenarioConfig& cfg);

struct Preset {
  std::string name;
  std::string description;
  nlohmann::json config;
};

const std::vector<Preset>& builtin_presets();
const Preset& find_preset(const std::string& name);

/// Plain-text table of the presets.
std::string list_builtin_scenarios();

}  // namespace doafoundry
