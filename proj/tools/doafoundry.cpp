// SPDX-License-Identifier: Apache-2.0
//
// doafoundry <kind> --config <path> [--seed S] [--trials T] [--out DIR]
// doafoundry <kind> --preset <name> [...]
// doafoundry presets
#include <CLI11.hpp>

#include <fmt/format.h>

#include <iostream>
#include <optional>

#include "doafoundry/error.hpp"
#include "doafoundry/harness.hpp"

namespace {

struct RunOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
};

int run(doafoundry::ExperimentKind kind, const RunOptions& opt) {
  using namespace doafoundry;
  ScenarioConfig cfg;
  if (!opt.preset.empty()) {
    cfg = parse_config(find_preset(opt.preset).config, kind);
  } else {
    cfg = load_config(opt.config, kind);
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.trials) {
    if (*opt.trials < 1) throw Error(ErrorCode::Configuration, "--trials must be positive");
    cfg.trials = *opt.trials;
  }
  if (opt.out) cfg.output_dir = *opt.out;
  const auto summary = run_experiment(cfg);
  for (const auto& [key, value] : summary.headline) fmt::print("{:<44} {}\n", key, value);
  for (const auto& f : summary.files) fmt::print("wrote {}\n", f.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction-of-arrival experiments"};
  app.require_subcommand(1);

  auto* presets = app.add_subcommand("presets", "List the built-in scenarios");

  RunOptions opt;
  std::vector<std::pair<CLI::App*, doafoundry::ExperimentKind>> kinds;
  for (auto kind : doafoundry::all_kinds()) {
    auto* sub = app.add_subcommand(doafoundry::to_string(kind), fmt::format("Run a {} experiment", doafoundry::to_string(kind)));
    auto* config = sub->add_option("--config", opt.config, "JSON scenario file");
    auto* preset = sub->add_option("--preset", opt.preset, "Built-in scenario name");
    config->excludes(preset);
    sub->add_option("--seed", opt.seed, "Override the master seed");
    sub->add_option("--trials", opt.trials, "Override the trial count");
    sub->add_option("--out", opt.out, "Output directory");
    kinds.emplace_back(sub, kind);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      std::cout << doafoundry::list_builtin_scenarios();
      return 0;
    }
    for (const auto& [sub, kind] : kinds) {
      if (!*sub) continue;
      if (opt.config.empty() && opt.preset.empty()) {
        std::cerr << "error: one of --config or --preset is required\n";
        return 2;
      }
      return run(kind, opt);
    }
  } catch (const doafoundry::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == doafoundry::ErrorCode::Configuration ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
