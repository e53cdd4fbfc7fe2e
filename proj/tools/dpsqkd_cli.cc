#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpsqkd/experiments.h"

int main(int argc, char** argv) {
  CLI::App app{"Batch experiment runner for the differential-phase-shift plug-and-play QKD simulator"};

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> rounds;
  std::vector<std::string> experiment_filter;
  std::string out_dir = ".";
  std::string format_name = "csv";

  app.add_option("--config", config_path, "Experiment config file (JSON)")->required();
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--rounds", rounds, "Rounds per session (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--experiment", experiment_filter, "Only run experiments of this kind (repeatable)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "structured"}));

  CLI11_PARSE(app, argc, argv);

  try {
    const dpsqkd::OutputFormat format = dpsqkd::parse_output_format(format_name);
    std::vector<dpsqkd::ExperimentKind> wanted;
    for (const std::string& name : experiment_filter) {
      wanted.push_back(dpsqkd::parse_experiment_kind(name));
    }

    std::vector<dpsqkd::ExperimentSpec> specs = dpsqkd::parse_config(config_path);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create output directory '" << out_dir << "': " << ec.message() << "\n";
      return 1;
    }

    int completed = 0;
    for (dpsqkd::ExperimentSpec& spec : specs) {
      if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), spec.kind) == wanted.end()) {
        continue;
      }
      if (seed) spec.config.seed = *seed;
      if (rounds) spec.config.rounds = *rounds;

      const dpsqkd::ResultTable table = dpsqkd::run_experiment(spec);
      const std::filesystem::path path =
          std::filesystem::path(out_dir) / (spec.output_stem + dpsqkd::file_extension(format));
      dpsqkd::emit(table, format, path);
      std::cout << dpsqkd::summarize(table) << "-> " << path.string() << "\n\n";
      ++completed;
    }
    if (completed == 0) {
      std::cerr << "warning: no experiment matched the filter\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
