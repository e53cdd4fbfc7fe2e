#pragma once

#include <cstdint>
#include <vector>

#include "dpsqkd/optics.h"
#include "dpsqkd/phase.h"
#include "dpsqkd/rng.h"

namespace dpsqkd {

inline constexpr int kMaxStages = 24;

// Bob's preparation cascade: n unbalanced MZIs with delays 2^{n-1}, ..., 2, 1
// slots. Bob's phase sits in the long arm of the last stage and is applied
// again when the returning train passes that stage.
class CascadeConfig {
 public:
  // Throws std::invalid_argument unless 1 <= n_stages <= kMaxStages.
  CascadeConfig(int n_stages, QuantizedPhase bob_phase);

  int n_stages() const { return n_stages_; }
  QuantizedPhase bob_phase() const { return bob_phase_; }
  std::vector<int> delays() const;

  // Prepared train occupies slots 1 .. 2^n; the returned interference pattern
  // spans 1 .. 2^n + 1.
  Slot pulse_count() const { return Slot{1} << n_stages_; }
  Slot first_slot() const { return 1; }
  Slot last_slot() const { return pulse_count() + 1; }
  bool is_edge_slot(Slot slot) const { return slot == first_slot() || slot == last_slot(); }
  bool is_inner_slot(Slot slot) const { return slot > first_slot() && slot < last_slot(); }

 private:
  int n_stages_;
  QuantizedPhase bob_phase_;
};

enum class BitOutcome { bit0, bit1, discard };

// phi_A in {0, pi} <-> bit {0, 1}. Throws for other phases.
BitOutcome bit_for_key_phase(QuantizedPhase key_phase);
QuantizedPhase key_phase_for_bit(int bit);

// Source pulse at slot 1 with horizontal polarization, split by the cascade
// (cross port forwarded at each stage). Result: 2^n slots of magnitude
// |source| / 2^n, odd slots at a common phase, even slots offset by phi_B.
PulseTrain bob_prepare(const CascadeConfig& config, Complex source_amplitude);

bool is_odd_slot(Slot slot);

// Alice's key modulation on the odd slots. key_phase must be 0 or pi.
PulseTrain alice_encode(const PulseTrain& train, QuantizedPhase key_phase);

// Return pass through the last cascade stage: d1 = cross port, d2 = bar port.
struct BobPorts {
  PulseTrain d1;
  PulseTrain d2;
};

BobPorts bob_measure(const PulseTrain& return_train, const CascadeConfig& config);

// Key bit from a click of D1/D2. Edge slots are discarded. Even slots: D1 -> 0,
// D2 -> 1. Odd inner slots: D1 <-> phi_A = 2 phi_B, D2 <-> phi_A = 2 phi_B + pi.
// Throws std::invalid_argument for D3/D4 or a slot outside 1 .. 2^n + 1.
BitOutcome infer_bit(const ClickEvent& click, const CascadeConfig& config);

// Alarm iff |E - expected| / expected > rel_tolerance.
bool alice_energy_monitor(const PulseTrain& train, double expected_energy, double rel_tolerance);

bool is_valid_check_phase(QuantizedPhase phase);

struct CheckResult {
  bool sampled = false;
  std::vector<ClickEvent> check_clicks;  // D3 = cross port, D4 = bar port of the check MZI
  PulseTrain pass_through;               // vacuum when sampled
};

// With probability sample_prob the whole train is diverted into the check MZI
// (delay 1, long-arm phase check_phase) and detected; otherwise forwarded.
CheckResult alice_sample_and_check(const PulseTrain& train, double sample_prob, QuantizedPhase check_phase,
                                   const DetectorParams& detector, Rng& rng);

enum class SlotParity { odd_lead, even_lead };
enum class CheckPrediction { D3, D4, unmatched };

// Parity of the earlier pulse in the pair interfering at `slot`.
SlotParity lead_parity(Slot slot);

CheckPrediction check_expected_outcome(QuantizedPhase bob_phase, QuantizedPhase check_phase,
                                       SlotParity parity);

struct DecoyResult {
  PulseTrain train;
  std::vector<Slot> decoy_positions;
};

// Encodes key_phase on odd slots, except that each odd slot independently (with
// probability decoy_prob) receives decoy_phase instead.
DecoyResult alice_decoy_replace(const PulseTrain& train, QuantizedPhase key_phase, double decoy_prob,
                                QuantizedPhase decoy_phase, Rng& rng);

}  // namespace dpsqkd
