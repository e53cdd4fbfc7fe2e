#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dpsqkd/session.h"

namespace dpsqkd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { baseline, efficiency_scan, attack_demo, birefringence_sweep, truth_table };

std::string to_string(ExperimentKind kind);
// Throws ConfigError for unknown names.
ExperimentKind parse_experiment_kind(std::string_view name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::baseline;
  std::string output_stem;  // file name without extension
  SessionConfig config;
  std::vector<int> n_values;  // efficiency_scan only

  // Session configurations this experiment runs, in output order.
  std::vector<SessionConfig> expand() const;
};

// Config file: a JSON object
//   {
//     "seed": 7,                          // optional master seed
//     "defaults": { <session keys> },     // optional
//     "experiments": [ "baseline", {"name": "efficiency_scan", "n_values": [1, 2, 3]}, ... ]
//   }
// Session keys: n_stages, rounds, source_mean_photons, mean_photons, sample_prob,
// decoy_prob, energy_tolerance, max_check_error, max_qber, disclose_fraction,
// seed, eve, detector {quantum_efficiency, dark_count_prob, double_click_policy},
// channel {loss_db, birefringence, unitary_seed}. Experiment objects accept the
// same keys as overrides plus "name", "output", and (efficiency_scan) "n_values".
std::vector<ExperimentSpec> parse_config(const std::filesystem::path& path);
std::vector<ExperimentSpec> parse_config_text(std::string_view text);

using Cell = std::variant<std::int64_t, double, std::string, std::monostate>;  // monostate = no data

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

ResultTable run_experiment(const ExperimentSpec& spec);

enum class OutputFormat { csv, structured };

// Throws ConfigError for unknown names.
OutputFormat parse_output_format(std::string_view name);
std::string file_extension(OutputFormat format);

// CSV: header row, ',' delimiter, LF endings, floats with 6 significant
// digits, empty field for missing data.
std::string to_csv(const ResultTable& table);
// JSON object {"experiment", "columns", "rows": [{column: value}]} with the
// same rounded values as the CSV.
std::string to_structured(const ResultTable& table);

// Throws std::runtime_error when the file cannot be written.
void emit(const ResultTable& table, OutputFormat format, const std::filesystem::path& path);

std::string summarize(const ResultTable& table);

}  // namespace dpsqkd
