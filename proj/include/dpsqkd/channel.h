#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dpsqkd/optics.h"
#include "dpsqkd/phase.h"
#include "dpsqkd/rng.h"

namespace dpsqkd {

enum class BirefringenceMode { none, fixed_unitary, random_per_train };

std::string to_string(BirefringenceMode mode);

struct ChannelParams {
  double loss_db = 0.0;  // one-way
  BirefringenceMode birefringence_mode = BirefringenceMode::none;
  std::uint64_t unitary_seed = 0;  // source of the fixed_unitary matrix

  double transmittance() const;
  void validate() const;
  bool operator==(const ChannelParams&) const = default;
};

// Haar-random element of U(2).
JonesMatrix random_unitary(Rng& rng);

enum class Direction { forward, backward };

// The fiber as seen by one round: the birefringence matrix is drawn once at
// construction and shared by both legs (collective noise).
class Fiber {
 public:
  // `round_rng` is only consumed in random_per_train mode.
  Fiber(const ChannelParams& params, Rng& round_rng);

  const JonesMatrix& unitary() const { return unitary_; }

  // Amplitudes scaled by sqrt(transmittance); polarization transformed by U on
  // the forward leg and reverse_pass(U) on the backward leg.
  PulseTrain transmit(const PulseTrain& train, Direction direction) const;

 private:
  ChannelParams params_;
  JonesMatrix unitary_;
};

PulseTrain fiber_transmit(const PulseTrain& train, const ChannelParams& params, Direction direction,
                          Rng& round_rng);

enum class EveKind { none, passive, intercept_resend_reference };

std::string to_string(EveKind kind);

// Eavesdropper hooks around Alice. One instance per round: the attack keeps the
// intercepted train and its reference pulse between the two legs.
//
// intercept_resend_reference: on the forward leg Eve stores Bob's train and
// sends Alice a flat-phase substitute with the same per-slot intensity. On the
// backward leg she reads Alice's phase off the returned substitute against her
// reference, encodes it on the stored train at the returned intensity, and
// reflects it to Bob with her own Faraday mirror.
class EveStrategy {
 public:
  explicit EveStrategy(EveKind kind = EveKind::none) : kind_(kind) {}

  EveKind kind() const { return kind_; }

  PulseTrain forward_hook(const PulseTrain& train, Rng& rng);

  // Throws std::logic_error for the attack if forward_hook was not called.
  PulseTrain backward_hook(const PulseTrain& train_from_alice, Rng& rng);

  const std::optional<QuantizedPhase>& inferred_key_phase() const { return inferred_; }
  const std::optional<PulseTrain>& stored_train() const { return stored_; }
  const std::optional<PulseTrain>& reference() const { return reference_; }

 private:
  EveKind kind_;
  std::optional<PulseTrain> stored_;
  std::optional<PulseTrain> reference_;
  std::optional<QuantizedPhase> inferred_;
};

// Flat-phase train with the per-slot intensity and polarization of `train`.
PulseTrain flat_substitute(const PulseTrain& train);

// Alice's odd-slot phase as read by interfering the returned substitute with
// the reference: per odd slot, the phase of returned/reference relative to the
// next even slot. Majority over readings in {0, pi}; zero when there are none.
QuantizedPhase read_key_phase(const PulseTrain& returned, const PulseTrain& reference);

}  // namespace dpsqkd
