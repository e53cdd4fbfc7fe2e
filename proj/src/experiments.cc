#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpsqkd/experiments.h"

namespace dpsqkd {

namespace {

Cell optional_cell(const std::optional<double>& value) {
  if (value) return *value;
  return std::monostate{};
}

Cell count(std::uint64_t value) { return static_cast<std::int64_t>(value); }

// Amplitudes from the exact phase table only pick up rounding noise.
double snap(double value) { return std::abs(value) < 1e-12 ? 0.0 : value; }

ResultTable baseline_table(const ExperimentSpec& spec) {
  ResultTable table{to_string(spec.kind),
                    {"n_stages", "rounds", "seed", "sifted_length", "efficiency", "edge_fraction", "qber",
                     "sifted_mismatches", "check_error_rate", "energy_alarms", "final_key_length", "insecure"},
                    {}};
  for (const SessionConfig& config : spec.expand()) {
    const SessionStats stats = run_session(config);
    table.rows.push_back({std::int64_t{config.n_stages}, count(config.rounds), count(config.seed),
                          count(stats.sifted_length), optional_cell(stats.efficiency),
                          optional_cell(stats.edge_fraction), optional_cell(stats.qber),
                          count(stats.sifted_mismatches), optional_cell(stats.check_error_rate),
                          count(stats.energy_alarms), count(stats.final_key.alice.size()),
                          std::int64_t{stats.insecure ? 1 : 0}});
  }
  return table;
}

ResultTable efficiency_table(const ExperimentSpec& spec) {
  ResultTable table{to_string(spec.kind),
                    {"n", "rounds", "single_click_rounds", "measured_efficiency", "energy_fraction",
                     "exact_efficiency", "competitor_efficiency"},
                    {}};
  for (const SessionConfig& config : spec.expand()) {
    const SessionStats stats = run_session(config);
    const Rational exact = theoretical_efficiency(config.n_stages);
    const Rational competitor = competitor_efficiency(config.n_stages);
    table.rows.push_back({std::int64_t{config.n_stages}, count(config.rounds), count(stats.single_click_rounds),
                          optional_cell(stats.efficiency),
                          inner_energy_fraction(config.n_stages, QuantizedPhase::zero(), QuantizedPhase::zero()),
                          exact.value(), competitor.value()});
  }
  return table;
}

ResultTable attack_table(const ExperimentSpec& spec) {
  ResultTable table{to_string(spec.kind),
                    {"scenario", "sample_prob", "rounds", "sifted_length", "qber", "sifted_mismatches", "leakage",
                     "check_matched_clicks", "check_error_rate", "oracle_check_error_rate", "energy_alarms",
                     "insecure"},
                    {}};
  const std::vector<SessionConfig> configs = spec.expand();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const SessionConfig& config = configs[i];
    const SessionStats stats = run_session(config);
    table.rows.push_back({std::string(i == 0 ? "checks_off" : "checks_on"), config.sample_prob,
                          count(config.rounds), count(stats.sifted_length), optional_cell(stats.qber),
                          count(stats.sifted_mismatches), optional_cell(stats.eve_agreement),
                          count(stats.check_matched_clicks), optional_cell(stats.check_error_rate),
                          attack_check_error_rate(config), count(stats.energy_alarms),
                          std::int64_t{stats.insecure ? 1 : 0}});
  }
  return table;
}

ResultTable birefringence_table(const ExperimentSpec& spec) {
  ResultTable table{to_string(spec.kind),
                    {"mode", "rounds", "d1_clicks", "d2_clicks", "single_click_rounds", "efficiency",
                     "edge_fraction", "sifted_length", "sifted_mismatches"},
                    {}};
  for (const SessionConfig& config : spec.expand()) {
    const SessionStats stats = run_session(config);
    table.rows.push_back({to_string(config.channel.birefringence_mode), count(config.rounds),
                          count(stats.d1_clicks), count(stats.d2_clicks), count(stats.single_click_rounds),
                          optional_cell(stats.efficiency), optional_cell(stats.edge_fraction),
                          count(stats.sifted_length), count(stats.sifted_mismatches)});
  }
  return table;
}

// Exact interference coefficients for every (phi_A, phi_B), plus whether the
// inner slots read back phi_A.
ResultTable truth_table(const ExperimentSpec& spec) {
  const int n = spec.config.n_stages;
  ResultTable table{to_string(spec.kind), {"phi_a", "phi_b"}, {}};
  const Slot last = (Slot{1} << n) + 1;
  for (const char* port : {"d1", "d2"}) {
    for (Slot slot = 1; slot <= last; ++slot) {
      table.columns.push_back(std::string(port) + "_re_t" + std::to_string(slot));
      table.columns.push_back(std::string(port) + "_im_t" + std::to_string(slot));
    }
  }
  table.columns.push_back("bit_recovered");

  for (const QuantizedPhase alice : {QuantizedPhase::zero(), QuantizedPhase::pi()}) {
    for (int b = 0; b < 4; ++b) {
      const QuantizedPhase bob(b);
      const CascadeConfig cascade(n, bob);
      const InterferencePattern pattern = interference_coefficients(n, alice, bob);
      std::vector<Cell> row = {alice.to_string(), bob.to_string()};
      for (const std::vector<Complex>* port : {&pattern.d1, &pattern.d2}) {
        for (const Complex& c : *port) {
          row.emplace_back(snap(c.real()));
          row.emplace_back(snap(c.imag()));
        }
      }
      bool recovered = true;
      for (std::size_t i = 0; i < pattern.slots.size(); ++i) {
        const Slot slot = pattern.slots[i];
        if (!cascade.is_inner_slot(slot)) continue;
        const bool d1_lit = std::norm(pattern.d1[i]) > 1e-12;
        const bool d2_lit = std::norm(pattern.d2[i]) > 1e-12;
        if (d1_lit == d2_lit) {
          recovered = false;
          continue;
        }
        const BitOutcome bit = infer_bit(ClickEvent{d1_lit ? Detector::D1 : Detector::D2, slot}, cascade);
        recovered = recovered && bit == bit_for_key_phase(alice);
      }
      row.emplace_back(std::int64_t{recovered ? 1 : 0});
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // also folds -0
  if (std::isnan(value)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string quoted = "\"";
  for (const char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string format_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return "";
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::baseline:
      return baseline_table(spec);
    case ExperimentKind::efficiency_scan:
      return efficiency_table(spec);
    case ExperimentKind::attack_demo:
      return attack_table(spec);
    case ExperimentKind::birefringence_sweep:
      return birefringence_table(spec);
    case ExperimentKind::truth_table:
      return truth_table(spec);
  }
  throw std::logic_error("unhandled experiment kind");
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "structured") return OutputFormat::structured;
  throw ConfigError("unknown output format '" + std::string(name) + "' (expected csv or structured)");
}

std::string file_extension(OutputFormat format) { return format == OutputFormat::csv ? ".csv" : ".json"; }

std::string to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(format_cell(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string to_structured(const ResultTable& table) {
  nlohmann::ordered_json root;
  root["experiment"] = table.name;
  root["columns"] = table.columns;
  root["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json object = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < table.columns.size(); ++i) {
      const Cell& cell = row[i];
      nlohmann::ordered_json value;
      if (const auto* n = std::get_if<std::int64_t>(&cell)) {
        value = *n;
      } else if (const auto* d = std::get_if<double>(&cell)) {
        value = std::stod(format_double(*d));
      } else if (const auto* s = std::get_if<std::string>(&cell)) {
        value = *s;
      }
      object[table.columns[i]] = value;
    }
    root["rows"].push_back(std::move(object));
  }
  return root.dump(2) + "\n";
}

void emit(const ResultTable& table, OutputFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write output file '" + path.string() + "'");
  }
  out << (format == OutputFormat::csv ? to_csv(table) : to_structured(table));
  out.flush();
  if (!out) {
    throw std::runtime_error("failed while writing '" + path.string() + "'");
  }
}

std::string summarize(const ResultTable& table) {
  std::ostringstream out;
  out << "== " << table.name << " (" << table.rows.size() << " row" << (table.rows.size() == 1 ? "" : "s")
      << ")\n";
  // Wide tables (truth_table) are summarized by their first and last columns.
  constexpr std::size_t kMaxColumns = 12;
  std::vector<std::size_t> shown;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (table.columns.size() <= kMaxColumns || i < 2 || i + 1 == table.columns.size()) shown.push_back(i);
  }
  std::vector<std::size_t> widths;
  for (const std::size_t i : shown) {
    std::size_t width = table.columns[i].size();
    for (const auto& row : table.rows) width = std::max(width, format_cell(row[i]).size());
    widths.push_back(width);
  }
  auto line = [&](auto&& text_of) {
    for (std::size_t k = 0; k < shown.size(); ++k) {
      const std::string text = text_of(shown[k]);
      out << (k ? "  " : "") << text << std::string(widths[k] - text.size(), ' ');
    }
    out << '\n';
  };
  line([&](std::size_t i) { return table.columns[i]; });
  for (const auto& row : table.rows) {
    line([&](std::size_t i) { return format_cell(row[i]); });
  }
  return out.str();
}

}  // namespace dpsqkd
