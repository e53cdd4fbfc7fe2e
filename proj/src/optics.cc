#include "dpsqkd/optics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpsqkd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr Complex kI(0.0, 1.0);
constexpr double kUnitNormTolerance = 1e-12;

// Splits a field vector into (amplitude, unit polarization), taking the phase
// of the amplitude from the projection onto `reference`.
OpticalPulse decompose(const JonesVector& field, const JonesVector& reference) {
  const double magnitude = norm(field);
  if (magnitude == 0.0) {
    return OpticalPulse{Complex(0.0, 0.0), reference};
  }
  const Complex projection = inner_product(reference, field);
  Complex amplitude(magnitude, 0.0);
  if (std::abs(projection) > 0.0) {
    amplitude = magnitude * projection / std::abs(projection);
  }
  return OpticalPulse{amplitude, {field[0] / amplitude, field[1] / amplitude}};
}

JonesVector field_of(const OpticalPulse& pulse) {
  return {pulse.amplitude * pulse.polarization[0], pulse.amplitude * pulse.polarization[1]};
}

}  // namespace

JonesMatrix multiply(const JonesMatrix& a, const JonesMatrix& b) {
  JonesMatrix out{};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
    }
  }
  return out;
}

JonesVector multiply(const JonesMatrix& m, const JonesVector& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

JonesMatrix transpose(const JonesMatrix& m) { return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }

JonesMatrix adjoint(const JonesMatrix& m) {
  return {{{std::conj(m[0][0]), std::conj(m[1][0])}, {std::conj(m[0][1]), std::conj(m[1][1])}}};
}

Complex determinant(const JonesMatrix& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

bool is_unitary(const JonesMatrix& m, double tolerance) {
  const JonesMatrix product = multiply(adjoint(m), m);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const Complex expected = (r == c) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
      if (std::abs(product[r][c] - expected) > tolerance) {
        return false;
      }
    }
  }
  return true;
}

JonesMatrix reverse_pass(const JonesMatrix& forward) { return adjoint(forward); }

Complex inner_product(const JonesVector& a, const JonesVector& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

double norm(const JonesVector& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

void PulseTrain::set(Slot slot, const OpticalPulse& pulse) {
  if (slot < 0) {
    throw std::invalid_argument("slot index must be non-negative, got " + std::to_string(slot));
  }
  if (std::abs(norm(pulse.polarization) - 1.0) > kUnitNormTolerance) {
    throw std::invalid_argument("polarization must be a unit Jones vector");
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), slot,
                             [](const Entry& e, Slot s) { return e.first < s; });
  if (it != entries_.end() && it->first == slot) {
    it->second = pulse;
  } else {
    entries_.insert(it, Entry{slot, pulse});
  }
}

const OpticalPulse* PulseTrain::find(Slot slot) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), slot,
                             [](const Entry& e, Slot s) { return e.first < s; });
  if (it != entries_.end() && it->first == slot) {
    return &it->second;
  }
  return nullptr;
}

Complex PulseTrain::amplitude_at(Slot slot) const {
  const OpticalPulse* pulse = find(slot);
  return pulse ? pulse->amplitude : Complex(0.0, 0.0);
}

double PulseTrain::energy_at(Slot slot) const { return std::norm(amplitude_at(slot)); }

double PulseTrain::total_energy() const {
  double total = 0.0;
  for (const auto& [slot, pulse] : entries_) {
    total += pulse.energy();
  }
  return total;
}

void PulseTrainBuilder::append(Slot slot, const OpticalPulse& pulse) {
  if (slot < 0) {
    throw std::invalid_argument("slot index must be non-negative, got " + std::to_string(slot));
  }
  if (!train_.entries_.empty() && train_.entries_.back().first >= slot) {
    throw std::logic_error("PulseTrainBuilder requires strictly increasing slots");
  }
  train_.entries_.emplace_back(slot, pulse);
}

std::pair<Complex, Complex> coupler_mix(Complex a, Complex b) {
  return {(a + kI * b) * kInvSqrt2, (kI * a + b) * kInvSqrt2};
}

std::pair<JonesVector, JonesVector> coupler_mix(const JonesVector& a, const JonesVector& b) {
  const auto [x1, y1] = coupler_mix(a[0], b[0]);
  const auto [x2, y2] = coupler_mix(a[1], b[1]);
  return {JonesVector{x1, x2}, JonesVector{y1, y2}};
}

MziPorts mzi_pass(const PulseTrain& train, int delay_slots, QuantizedPhase long_arm_phase) {
  if (delay_slots < 1) {
    throw std::invalid_argument("mzi_pass: delay_slots must be >= 1, got " + std::to_string(delay_slots));
  }
  const Complex rotor = long_arm_phase.rotor();

  // Output window: union of the input slots and the input slots shifted by the delay.
  std::vector<Slot> slots;
  slots.reserve(2 * train.size());
  {
    auto short_it = train.begin();
    auto long_it = train.begin();
    while (short_it != train.end() || long_it != train.end()) {
      const Slot s = short_it != train.end() ? short_it->first : INT64_MAX;
      const Slot l = long_it != train.end() ? long_it->first + delay_slots : INT64_MAX;
      const Slot next = std::min(s, l);
      slots.push_back(next);
      if (s == next) ++short_it;
      if (l == next) ++long_it;
    }
  }

  PulseTrainBuilder bar(train.slot_duration(), slots.size());
  PulseTrainBuilder cross(train.slot_duration(), slots.size());
  for (const Slot slot : slots) {
    const OpticalPulse* short_in = train.find(slot);
    const OpticalPulse* long_in = train.find(slot - delay_slots);

    if (short_in == nullptr || long_in == nullptr ||
        short_in->polarization == long_in->polarization) {
      // Common polarization: scalar interference.
      const JonesVector& polarization = short_in ? short_in->polarization : long_in->polarization;
      const Complex short_arm = coupler_mix(short_in ? short_in->amplitude : Complex(), Complex()).first;
      const Complex long_arm =
          rotor * coupler_mix(long_in ? long_in->amplitude : Complex(), Complex()).second;
      const auto [out1, out2] = coupler_mix(short_arm, long_arm);
      bar.append(slot, OpticalPulse{out1, polarization});
      cross.append(slot, OpticalPulse{out2, polarization});
      continue;
    }

    const JonesVector zero{};
    const JonesVector short_arm = coupler_mix(field_of(*short_in), zero).first;
    JonesVector long_arm = coupler_mix(field_of(*long_in), zero).second;
    long_arm = {rotor * long_arm[0], rotor * long_arm[1]};
    const auto [out1, out2] = coupler_mix(short_arm, long_arm);
    bar.append(slot, decompose(out1, short_in->polarization));
    cross.append(slot, decompose(out2, short_in->polarization));
  }
  return MziPorts{std::move(bar).build(), std::move(cross).build()};
}

PulseTrain phase_modulate(const PulseTrain& train, const SlotSelector& selector, QuantizedPhase phase) {
  const Complex rotor = phase.rotor();
  PulseTrainBuilder out(train.slot_duration(), train.size());
  for (const auto& [slot, pulse] : train) {
    OpticalPulse modulated = pulse;
    if (selector(slot)) {
      modulated.amplitude *= rotor;
    }
    out.append(slot, modulated);
  }
  return std::move(out).build();
}

PulseTrain scale_amplitudes(const PulseTrain& train, double factor) {
  PulseTrainBuilder out(train.slot_duration(), train.size());
  for (const auto& [slot, pulse] : train) {
    out.append(slot, OpticalPulse{pulse.amplitude * factor, pulse.polarization});
  }
  return std::move(out).build();
}

PulseTrain attenuate(const PulseTrain& train, double target_mean_photons) {
  if (!(target_mean_photons >= 0.0) || !std::isfinite(target_mean_photons)) {
    throw std::invalid_argument("attenuate: target mean photon number must be finite and >= 0");
  }
  if (target_mean_photons == 0.0) {
    return PulseTrain(train.slot_duration());
  }
  const double energy = train.total_energy();
  if (energy == 0.0) {
    throw std::invalid_argument("attenuate: cannot rescale a vacuum train to a positive energy");
  }
  return scale_amplitudes(train, std::sqrt(target_mean_photons / energy));
}

PulseTrain jones_apply(const PulseTrain& train, const JonesMatrix& transform) {
  if (!is_unitary(transform, 1e-10)) {
    throw std::invalid_argument("jones_apply: transform is not unitary");
  }
  PulseTrainBuilder out(train.slot_duration(), train.size());
  for (const auto& [slot, pulse] : train) {
    out.append(slot, OpticalPulse{pulse.amplitude, multiply(transform, pulse.polarization)});
  }
  return std::move(out).build();
}

JonesVector faraday_image(const JonesVector& p) { return {std::conj(p[1]), -std::conj(p[0])}; }

PulseTrain faraday_reflect(const PulseTrain& train) {
  PulseTrainBuilder out(train.slot_duration(), train.size());
  for (const auto& [slot, pulse] : train) {
    out.append(slot, OpticalPulse{pulse.amplitude, faraday_image(pulse.polarization)});
  }
  return std::move(out).build();
}

std::string to_string(Detector detector) {
  switch (detector) {
    case Detector::D1:
      return "D1";
    case Detector::D2:
      return "D2";
    case Detector::D3:
      return "D3";
    case Detector::D4:
      return "D4";
  }
  return "?";
}

void DetectorParams::validate() const {
  if (!(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0)) {
    throw std::invalid_argument("quantum_efficiency must lie in [0, 1]");
  }
  if (!(dark_count_prob >= 0.0 && dark_count_prob <= 1.0)) {
    throw std::invalid_argument("dark_count_prob must lie in [0, 1]");
  }
}

double click_probability(double energy, const DetectorParams& params) {
  const double signal = -std::expm1(-params.quantum_efficiency * energy);
  return 1.0 - (1.0 - signal) * (1.0 - params.dark_count_prob);
}

std::vector<ClickEvent> detect(std::span<const DetectorBranch> branches, const DetectorParams& params,
                               Rng& rng) {
  params.validate();
  std::vector<ClickEvent> clicks;
  for (const DetectorBranch& branch : branches) {
    for (const auto& [slot, pulse] : branch.train) {
      const double p = click_probability(pulse.energy(), params);
      if (rng.uniform() < p) {
        clicks.push_back(ClickEvent{branch.detector, slot});
      }
    }
  }
  return clicks;
}

}  // namespace dpsqkd
