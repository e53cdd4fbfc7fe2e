#include "dpsqkd/channel.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dpsqkd/stations.h"

namespace dpsqkd {

std::string to_string(BirefringenceMode mode) {
  switch (mode) {
    case BirefringenceMode::none:
      return "none";
    case BirefringenceMode::fixed_unitary:
      return "fixed_unitary";
    case BirefringenceMode::random_per_train:
      return "random_per_train";
  }
  return "?";
}

std::string to_string(EveKind kind) {
  switch (kind) {
    case EveKind::none:
      return "none";
    case EveKind::passive:
      return "passive";
    case EveKind::intercept_resend_reference:
      return "intercept_resend_reference";
  }
  return "?";
}

double ChannelParams::transmittance() const { return std::pow(10.0, -loss_db / 10.0); }

void ChannelParams::validate() const {
  if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) {
    throw std::invalid_argument("loss_db must be finite and >= 0");
  }
}

JonesMatrix random_unitary(Rng& rng) {
  // Haar measure on U(2): |U00|^2 uniform on [0, 1], independent uniform phases.
  const double cos_sq = rng.uniform();
  const double psi = 2.0 * std::numbers::pi * rng.uniform();
  const double chi = 2.0 * std::numbers::pi * rng.uniform();
  const double alpha = 2.0 * std::numbers::pi * rng.uniform();
  const double c = std::sqrt(cos_sq);
  const double s = std::sqrt(1.0 - cos_sq);
  const Complex global = std::polar(1.0, alpha);
  return {{{global * std::polar(c, psi), global * std::polar(s, chi)},
           {-global * std::polar(s, -chi), global * std::polar(c, -psi)}}};
}

Fiber::Fiber(const ChannelParams& params, Rng& round_rng) : params_(params), unitary_(kIdentityJones) {
  params_.validate();
  switch (params_.birefringence_mode) {
    case BirefringenceMode::none:
      break;
    case BirefringenceMode::fixed_unitary: {
      Rng fixed(params_.unitary_seed);
      unitary_ = random_unitary(fixed);
      break;
    }
    case BirefringenceMode::random_per_train:
      unitary_ = random_unitary(round_rng);
      break;
  }
}

PulseTrain Fiber::transmit(const PulseTrain& train, Direction direction) const {
  PulseTrain out = params_.loss_db == 0.0 ? train : scale_amplitudes(train, std::sqrt(params_.transmittance()));
  if (params_.birefringence_mode == BirefringenceMode::none) {
    return out;
  }
  return jones_apply(out, direction == Direction::forward ? unitary_ : reverse_pass(unitary_));
}

PulseTrain fiber_transmit(const PulseTrain& train, const ChannelParams& params, Direction direction,
                          Rng& round_rng) {
  return Fiber(params, round_rng).transmit(train, direction);
}

PulseTrain flat_substitute(const PulseTrain& train) {
  PulseTrainBuilder out(train.slot_duration(), train.size());
  for (const auto& [slot, pulse] : train) {
    out.append(slot, OpticalPulse{Complex(std::abs(pulse.amplitude), 0.0), pulse.polarization});
  }
  return std::move(out).build();
}

QuantizedPhase read_key_phase(const PulseTrain& returned, const PulseTrain& reference) {
  int votes_zero = 0;
  int votes_pi = 0;
  for (const auto& [slot, pulse] : returned) {
    if (!is_odd_slot(slot)) continue;
    const Complex odd = pulse.amplitude * std::conj(reference.amplitude_at(slot));
    const Complex even = returned.amplitude_at(slot + 1) * std::conj(reference.amplitude_at(slot + 1));
    if (std::abs(odd) == 0.0 || std::abs(even) == 0.0) continue;
    // odd / even = e^{-i phi} for the phase written on this odd slot.
    const double phase = -std::arg(odd / even);
    const int quarter = static_cast<int>(std::lround(phase / (std::numbers::pi / 2.0)));
    const QuantizedPhase reading(quarter);
    if (reading == QuantizedPhase::zero()) ++votes_zero;
    if (reading == QuantizedPhase::pi()) ++votes_pi;
  }
  return votes_pi > votes_zero ? QuantizedPhase::pi() : QuantizedPhase::zero();
}

PulseTrain EveStrategy::forward_hook(const PulseTrain& train, Rng& /*rng*/) {
  if (kind_ != EveKind::intercept_resend_reference) {
    return train;
  }
  stored_ = train;
  reference_ = flat_substitute(train);
  inferred_.reset();
  return *reference_;
}

PulseTrain EveStrategy::backward_hook(const PulseTrain& train_from_alice, Rng& /*rng*/) {
  if (kind_ != EveKind::intercept_resend_reference) {
    return train_from_alice;
  }
  if (!stored_ || !reference_) {
    throw std::logic_error("eve backward hook called without a stored forward train");
  }
  inferred_ = read_key_phase(train_from_alice, *reference_);
  const PulseTrain rescaled = attenuate(*stored_, train_from_alice.total_energy());
  PulseTrain resend = faraday_reflect(alice_encode(rescaled, *inferred_));
  stored_.reset();
  reference_.reset();
  return resend;
}

}  // namespace dpsqkd
