#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpsqkd/experiments.h"
#include "dpsqkd/session.h"

namespace py = pybind11;
using namespace dpsqkd;

namespace {

py::dict stats_dict(const SessionStats& s) {
  py::dict d;
  d["rounds"] = s.rounds;
  d["sampled_rounds"] = s.sampled_rounds;
  d["single_click_rounds"] = s.single_click_rounds;
  d["multi_click_rounds"] = s.multi_click_rounds;
  d["inner_clicks"] = s.inner_clicks;
  d["edge_clicks"] = s.edge_clicks;
  d["d1_clicks"] = s.d1_clicks;
  d["d2_clicks"] = s.d2_clicks;
  d["efficiency"] = s.efficiency;
  d["edge_fraction"] = s.edge_fraction;
  d["sifted_length"] = s.sifted_length;
  d["sifted_mismatches"] = s.sifted_mismatches;
  d["decoy_discards"] = s.decoy_discards;
  d["qber"] = s.qber;
  d["disclosed_bits"] = s.disclosed_bits;
  d["final_key_length"] = s.final_key.alice.size();
  d["check_matched_clicks"] = s.check_matched_clicks;
  d["check_errors"] = s.check_errors;
  d["check_error_rate"] = s.check_error_rate;
  d["energy_alarms"] = s.energy_alarms;
  d["eve_agreement"] = s.eve_agreement;
  d["insecure"] = s.insecure;
  return d;
}

py::object cell_value(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return py::int_(*i);
  if (const auto* d = std::get_if<double>(&cell)) return py::float_(*d);
  if (const auto* s = std::get_if<std::string>(&cell)) return py::str(*s);
  return py::none();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differential-phase-shift QKD simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<QuantizedPhase>(m, "QuantizedPhase")
      .def(py::init<int>(), py::arg("quarter_turns") = 0)
      .def_property_readonly("quarter_turns", &QuantizedPhase::quarter_turns)
      .def_property_readonly("radians", &QuantizedPhase::radians)
      .def("__add__", [](QuantizedPhase a, QuantizedPhase b) { return a + b; })
      .def("__sub__", [](QuantizedPhase a, QuantizedPhase b) { return a - b; })
      .def("__eq__", [](QuantizedPhase a, QuantizedPhase b) { return a == b; })
      .def("__hash__", [](QuantizedPhase a) { return a.quarter_turns(); })
      .def("__repr__", [](QuantizedPhase a) { return "QuantizedPhase(" + a.to_string() + ")"; });

  py::class_<PulseTrain>(m, "PulseTrain")
      .def(py::init<>())
      .def("set", [](PulseTrain& t, Slot slot, Complex amplitude) { t.set(slot, amplitude); })
      .def("amplitude_at", &PulseTrain::amplitude_at)
      .def("energy_at", &PulseTrain::energy_at)
      .def_property_readonly("total_energy", &PulseTrain::total_energy)
      .def("__len__", &PulseTrain::size)
      .def("amplitudes", [](const PulseTrain& t) {
        std::vector<std::pair<Slot, Complex>> out;
        for (const auto& [slot, pulse] : t) out.emplace_back(slot, pulse.amplitude);
        return out;
      });

  py::class_<CascadeConfig>(m, "CascadeConfig")
      .def(py::init<int, QuantizedPhase>(), py::arg("n_stages"), py::arg("bob_phase"))
      .def_property_readonly("pulse_count", &CascadeConfig::pulse_count)
      .def_property_readonly("delays", &CascadeConfig::delays)
      .def("is_inner_slot", &CascadeConfig::is_inner_slot);

  m.def("bob_prepare", &bob_prepare, py::arg("config"), py::arg("source_amplitude") = Complex(1.0, 0.0));
  m.def("alice_encode", &alice_encode, py::arg("train"), py::arg("key_phase"));
  m.def("faraday_reflect", &faraday_reflect, py::arg("train"));
  m.def("bob_measure", [](const PulseTrain& train, const CascadeConfig& config) {
    BobPorts ports = bob_measure(train, config);
    return py::make_tuple(ports.d1, ports.d2);
  }, py::arg("train"), py::arg("config"));

  m.def("theoretical_efficiency", [](int n) {
    const Rational r = theoretical_efficiency(n);
    return py::make_tuple(r.num, r.den);
  });
  m.def("competitor_efficiency", [](int n) {
    const Rational r = competitor_efficiency(n);
    return py::make_tuple(r.num, r.den);
  });
  m.def("inner_energy_fraction", &inner_energy_fraction, py::arg("n_stages"), py::arg("alice_phase"),
        py::arg("bob_phase"));
  m.def("interference_coefficients", [](int n, QuantizedPhase a, QuantizedPhase b) {
    const InterferencePattern p = interference_coefficients(n, a, b);
    return py::make_tuple(p.slots, p.d1, p.d2);
  }, py::arg("n_stages"), py::arg("alice_phase"), py::arg("bob_phase"));

  py::enum_<EveKind>(m, "EveKind")
      .value("none", EveKind::none)
      .value("passive", EveKind::passive)
      .value("intercept_resend_reference", EveKind::intercept_resend_reference);
  py::enum_<BirefringenceMode>(m, "BirefringenceMode")
      .value("none", BirefringenceMode::none)
      .value("fixed_unitary", BirefringenceMode::fixed_unitary)
      .value("random_per_train", BirefringenceMode::random_per_train);

  py::class_<SessionConfig>(m, "SessionConfig")
      .def(py::init<>())
      .def_readwrite("n_stages", &SessionConfig::n_stages)
      .def_readwrite("rounds", &SessionConfig::rounds)
      .def_readwrite("source_mean_photons", &SessionConfig::source_mean_photons)
      .def_readwrite("mean_photons", &SessionConfig::mean_photons_return)
      .def_readwrite("sample_prob", &SessionConfig::sample_prob)
      .def_readwrite("decoy_prob", &SessionConfig::decoy_prob)
      .def_readwrite("energy_tolerance", &SessionConfig::energy_tolerance)
      .def_readwrite("max_check_error", &SessionConfig::max_check_error)
      .def_readwrite("max_qber", &SessionConfig::max_qber)
      .def_readwrite("disclose_fraction", &SessionConfig::disclose_fraction)
      .def_readwrite("eve", &SessionConfig::eve)
      .def_readwrite("seed", &SessionConfig::seed)
      .def_property("quantum_efficiency", [](const SessionConfig& c) { return c.detector.quantum_efficiency; },
                    [](SessionConfig& c, double v) { c.detector.quantum_efficiency = v; })
      .def_property("dark_count_prob", [](const SessionConfig& c) { return c.detector.dark_count_prob; },
                    [](SessionConfig& c, double v) { c.detector.dark_count_prob = v; })
      .def_property("loss_db", [](const SessionConfig& c) { return c.channel.loss_db; },
                    [](SessionConfig& c, double v) { c.channel.loss_db = v; })
      .def_property("birefringence", [](const SessionConfig& c) { return c.channel.birefringence_mode; },
                    [](SessionConfig& c, BirefringenceMode v) { c.channel.birefringence_mode = v; })
      .def("validate", &SessionConfig::validate);

  m.def("run_session", [](const SessionConfig& config) {
    SessionStats stats;
    {
      py::gil_scoped_release release;
      stats = run_session(config);
    }
    return stats_dict(stats);
  }, py::arg("config"));
  m.def("attack_check_error_rate", &attack_check_error_rate, py::arg("config"));

  m.def("run_config", [](const std::string& text, const std::string& format) {
    const OutputFormat output = parse_output_format(format);
    py::dict results;
    for (const ExperimentSpec& spec : parse_config_text(text)) {
      ResultTable table;
      {
        py::gil_scoped_release release;
        table = run_experiment(spec);
      }
      results[py::str(spec.output_stem)] = output == OutputFormat::csv ? to_csv(table) : to_structured(table);
    }
    return results;
  }, py::arg("config_text"), py::arg("format") = "csv");

  m.def("run_experiment_rows", [](const std::string& text) {
    py::list tables;
    for (const ExperimentSpec& spec : parse_config_text(text)) {
      const ResultTable table = run_experiment(spec);
      py::list rows;
      for (const auto& row : table.rows) {
        py::dict record;
        for (std::size_t i = 0; i < row.size(); ++i) record[py::str(table.columns[i])] = cell_value(row[i]);
        rows.append(record);
      }
      tables.append(py::make_tuple(spec.output_stem, rows));
    }
    return tables;
  }, py::arg("config_text"));
}
