#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpsqkd/phase.h"
#include "dpsqkd/rng.h"

namespace dpsqkd {

using Complex = std::complex<double>;
using Slot = std::int64_t;

// Jones vector (field polarization) and 2x2 Jones matrix.
using JonesVector = std::array<Complex, 2>;
using JonesMatrix = std::array<std::array<Complex, 2>, 2>;

inline constexpr JonesVector kHorizontal = {Complex(1.0, 0.0), Complex(0.0, 0.0)};
inline constexpr JonesMatrix kIdentityJones = {{{Complex(1.0, 0.0), Complex(0.0, 0.0)},
                                                {Complex(0.0, 0.0), Complex(1.0, 0.0)}}};

JonesMatrix multiply(const JonesMatrix& a, const JonesMatrix& b);
JonesVector multiply(const JonesMatrix& m, const JonesVector& v);
JonesMatrix transpose(const JonesMatrix& m);
JonesMatrix adjoint(const JonesMatrix& m);
Complex determinant(const JonesMatrix& m);
bool is_unitary(const JonesMatrix& m, double tolerance = 1e-10);

// Lab-frame matrix for the return trip through a reciprocal fiber whose
// forward matrix is `forward`. The reverse pass is the transpose acting on the
// conjugate representation of the counter-propagating field, i.e. adjoint in
// the lab frame; with faraday_reflect this gives
//   reverse_pass(U) * FM(U p) = conj(det U) * FM(p).
JonesMatrix reverse_pass(const JonesMatrix& forward);

Complex inner_product(const JonesVector& a, const JonesVector& b);  // <a|b>
double norm(const JonesVector& v);

// One time slot of light. `amplitude` carries all intensity and phase
// (|amplitude|^2 = mean photon number); `polarization` is a unit Jones vector.
struct OpticalPulse {
  Complex amplitude{0.0, 0.0};
  JonesVector polarization = kHorizontal;

  double energy() const { return std::norm(amplitude); }
  bool operator==(const OpticalPulse&) const = default;
};

// Sparse slot -> pulse map; absent slots are vacuum. Stored as a vector sorted
// by slot since trains are short and rebuilt every round.
class PulseTrain {
 public:
  using Entry = std::pair<Slot, OpticalPulse>;

  explicit PulseTrain(double slot_duration = 1.0) : slot_duration_(slot_duration) {}

  // Inserts or replaces. Throws std::invalid_argument on a negative slot or a
  // polarization that is not unit norm within 1e-12.
  void set(Slot slot, const OpticalPulse& pulse);
  void set(Slot slot, Complex amplitude, const JonesVector& polarization = kHorizontal) {
    set(slot, OpticalPulse{amplitude, polarization});
  }

  const OpticalPulse* find(Slot slot) const;
  Complex amplitude_at(Slot slot) const;
  double energy_at(Slot slot) const;
  double total_energy() const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  double slot_duration() const { return slot_duration_; }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool operator==(const PulseTrain&) const = default;

 private:
  friend class PulseTrainBuilder;
  std::vector<Entry> entries_;
  double slot_duration_;
};

// Appends slots in strictly increasing order without per-insert search.
class PulseTrainBuilder {
 public:
  explicit PulseTrainBuilder(double slot_duration, std::size_t reserve = 0) : train_(slot_duration) {
    train_.entries_.reserve(reserve);
  }
  void append(Slot slot, const OpticalPulse& pulse);
  PulseTrain build() && { return std::move(train_); }

 private:
  PulseTrain train_;
};

// 50:50 coupler, symmetric convention [[1, i], [i, 1]] / sqrt(2).
std::pair<Complex, Complex> coupler_mix(Complex a, Complex b);
std::pair<JonesVector, JonesVector> coupler_mix(const JonesVector& a, const JonesVector& b);

// Output ports of an unbalanced Mach-Zehnder interferometer fed at its first
// input. For input field x(k):
//   port1 (bar)   = (x(k) - e^{-i phi} x(k - d)) / 2
//   port2 (cross) = i (x(k) + e^{-i phi} x(k - d)) / 2
// Both ports cover every slot of input ∪ (input + d), zero entries included.
struct MziPorts {
  PulseTrain port1;
  PulseTrain port2;
};

MziPorts mzi_pass(const PulseTrain& train, int delay_slots, QuantizedPhase long_arm_phase);

using SlotSelector = std::function<bool(Slot)>;

PulseTrain phase_modulate(const PulseTrain& train, const SlotSelector& selector, QuantizedPhase phase);

// Uniform rescale to the requested total energy. Throws std::invalid_argument
// for a negative target or a vacuum train with a positive target.
PulseTrain attenuate(const PulseTrain& train, double target_mean_photons);

PulseTrain scale_amplitudes(const PulseTrain& train, double factor);

// Throws std::invalid_argument unless `transform` is unitary within 1e-10.
PulseTrain jones_apply(const PulseTrain& train, const JonesMatrix& transform);

// Faraday mirror image of every pulse: (p1, p2) -> (conj p2, -conj p1).
JonesVector faraday_image(const JonesVector& p);
PulseTrain faraday_reflect(const PulseTrain& train);

enum class Detector { D1, D2, D3, D4 };

std::string to_string(Detector detector);

struct ClickEvent {
  Detector detector;
  Slot slot;

  bool operator==(const ClickEvent&) const = default;
};

enum class DoubleClickPolicy { discard_round, random_pick };

struct DetectorParams {
  double quantum_efficiency = 1.0;
  double dark_count_prob = 0.0;
  DoubleClickPolicy double_click_policy = DoubleClickPolicy::discard_round;

  void validate() const;
  bool operator==(const DetectorParams&) const = default;
};

// 1 - (1 - (1 - exp(-eta * energy))) * (1 - dark).
double click_probability(double energy, const DetectorParams& params);

struct DetectorBranch {
  Detector detector;
  PulseTrain train;
};

// One Bernoulli draw per (branch, slot present in the branch train), in branch
// order then slot order. Clicks are returned in that order.
std::vector<ClickEvent> detect(std::span<const DetectorBranch> branches, const DetectorParams& params,
                               Rng& rng);

}  // namespace dpsqkd
