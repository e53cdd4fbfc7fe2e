#include "dpsqkd/stations.h"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpsqkd {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

CascadeConfig::CascadeConfig(int n_stages, QuantizedPhase bob_phase)
    : n_stages_(n_stages), bob_phase_(bob_phase) {
  if (n_stages < 1 || n_stages > kMaxStages) {
    throw std::invalid_argument("n_stages must lie in [1, " + std::to_string(kMaxStages) + "], got " +
                                std::to_string(n_stages));
  }
}

std::vector<int> CascadeConfig::delays() const {
  std::vector<int> delays;
  delays.reserve(n_stages_);
  for (int stage = n_stages_ - 1; stage >= 0; --stage) {
    delays.push_back(1 << stage);
  }
  return delays;
}

BitOutcome bit_for_key_phase(QuantizedPhase key_phase) {
  if (key_phase == QuantizedPhase::zero()) return BitOutcome::bit0;
  if (key_phase == QuantizedPhase::pi()) return BitOutcome::bit1;
  throw std::invalid_argument("key phase must be 0 or pi, got " + key_phase.to_string());
}

QuantizedPhase key_phase_for_bit(int bit) { return bit == 0 ? QuantizedPhase::zero() : QuantizedPhase::pi(); }

PulseTrain bob_prepare(const CascadeConfig& config, Complex source_amplitude) {
  PulseTrain train;
  train.set(config.first_slot(), source_amplitude);
  const std::vector<int> delays = config.delays();
  for (std::size_t stage = 0; stage < delays.size(); ++stage) {
    const bool last = stage + 1 == delays.size();
    const QuantizedPhase phase = last ? config.bob_phase() : QuantizedPhase::zero();
    train = mzi_pass(train, delays[stage], phase).port2;
  }
  return train;
}

bool is_odd_slot(Slot slot) { return slot % 2 != 0; }

PulseTrain alice_encode(const PulseTrain& train, QuantizedPhase key_phase) {
  (void)bit_for_key_phase(key_phase);
  return phase_modulate(train, is_odd_slot, key_phase);
}

BobPorts bob_measure(const PulseTrain& return_train, const CascadeConfig& config) {
  MziPorts ports = mzi_pass(return_train, 1, config.bob_phase());
  return BobPorts{std::move(ports.port2), std::move(ports.port1)};
}

BitOutcome infer_bit(const ClickEvent& click, const CascadeConfig& config) {
  if (click.detector != Detector::D1 && click.detector != Detector::D2) {
    throw std::invalid_argument("infer_bit: " + to_string(click.detector) + " is not a key detector");
  }
  if (click.slot < config.first_slot() || click.slot > config.last_slot()) {
    throw std::invalid_argument("infer_bit: slot " + std::to_string(click.slot) +
                                " outside the interference window");
  }
  if (config.is_edge_slot(click.slot)) {
    return BitOutcome::discard;
  }
  const bool d1 = click.detector == Detector::D1;
  if (!is_odd_slot(click.slot)) {
    return d1 ? BitOutcome::bit0 : BitOutcome::bit1;
  }
  // D1 lights when phi_A = 2 phi_B; D2 when phi_A = 2 phi_B + pi.
  const QuantizedPhase key_phase = d1 ? config.bob_phase().doubled()
                                      : config.bob_phase().doubled() + QuantizedPhase::pi();
  return bit_for_key_phase(key_phase);
}

bool alice_energy_monitor(const PulseTrain& train, double expected_energy, double rel_tolerance) {
  if (!(expected_energy > 0.0)) {
    throw std::invalid_argument("alice_energy_monitor: expected energy must be positive");
  }
  return std::abs(train.total_energy() - expected_energy) / expected_energy > rel_tolerance;
}

bool is_valid_check_phase(QuantizedPhase phase) {
  return phase == QuantizedPhase::zero() || phase == QuantizedPhase::half_pi();
}

CheckResult alice_sample_and_check(const PulseTrain& train, double sample_prob, QuantizedPhase check_phase,
                                   const DetectorParams& detector, Rng& rng) {
  if (!is_valid_check_phase(check_phase)) {
    throw std::invalid_argument("check phase must be 0 or pi/2, got " + check_phase.to_string());
  }
  require_probability(sample_prob, "sample_prob");

  CheckResult result;
  result.sampled = rng.bernoulli(sample_prob);
  if (!result.sampled) {
    result.pass_through = train;
    return result;
  }
  MziPorts ports = mzi_pass(train, 1, check_phase);
  const std::array<DetectorBranch, 2> branches = {DetectorBranch{Detector::D3, std::move(ports.port2)},
                                                  DetectorBranch{Detector::D4, std::move(ports.port1)}};
  result.check_clicks = detect(branches, detector, rng);
  result.pass_through = PulseTrain(train.slot_duration());
  return result;
}

SlotParity lead_parity(Slot slot) { return is_odd_slot(slot - 1) ? SlotParity::odd_lead : SlotParity::even_lead; }

CheckPrediction check_expected_outcome(QuantizedPhase bob_phase, QuantizedPhase check_phase,
                                       SlotParity parity) {
  if (!is_valid_check_phase(check_phase)) {
    throw std::invalid_argument("check phase must be 0 or pi/2, got " + check_phase.to_string());
  }
  // Cross-port coefficient of the pair is 1 + e^{-i theta} with
  // theta = phi_B + phi'_A (even lead) or phi'_A - phi_B (odd lead).
  const QuantizedPhase relative =
      parity == SlotParity::even_lead ? bob_phase + check_phase : bob_phase - check_phase;
  if (relative == QuantizedPhase::zero()) return CheckPrediction::D3;
  if (relative == QuantizedPhase::pi()) return CheckPrediction::D4;
  return CheckPrediction::unmatched;
}

DecoyResult alice_decoy_replace(const PulseTrain& train, QuantizedPhase key_phase, double decoy_prob,
                                QuantizedPhase decoy_phase, Rng& rng) {
  (void)bit_for_key_phase(key_phase);
  if (!is_valid_check_phase(decoy_phase)) {
    throw std::invalid_argument("decoy phase must be 0 or pi/2, got " + decoy_phase.to_string());
  }
  require_probability(decoy_prob, "decoy_prob");

  DecoyResult result;
  PulseTrainBuilder out(train.slot_duration(), train.size());
  const Complex key_rotor = key_phase.rotor();
  const Complex decoy_rotor = decoy_phase.rotor();
  for (const auto& [slot, pulse] : train) {
    OpticalPulse encoded = pulse;
    if (is_odd_slot(slot)) {
      if (rng.bernoulli(decoy_prob)) {
        encoded.amplitude *= decoy_rotor;
        result.decoy_positions.push_back(slot);
      } else {
        encoded.amplitude *= key_rotor;
      }
    }
    out.append(slot, encoded);
  }
  result.train = std::move(out).build();
  return result;
}

}  // namespace dpsqkd
