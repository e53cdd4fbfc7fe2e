#pragma once

#include <array>
#include <complex>
#include <numbers>
#include <string>

namespace dpsqkd {

// Phase restricted to multiples of pi/2, stored as an element of Z4.
// Every phase used by the protocol (key, preparation, check bases) lives here,
// so readout rules reduce to integer arithmetic.
class QuantizedPhase {
 public:
  constexpr QuantizedPhase() = default;
  constexpr explicit QuantizedPhase(int quarter_turns)
      : quarter_turns_(((quarter_turns % 4) + 4) % 4) {}

  static constexpr QuantizedPhase zero() { return QuantizedPhase(0); }
  static constexpr QuantizedPhase half_pi() { return QuantizedPhase(1); }
  static constexpr QuantizedPhase pi() { return QuantizedPhase(2); }
  static constexpr QuantizedPhase three_half_pi() { return QuantizedPhase(3); }

  constexpr int quarter_turns() const { return quarter_turns_; }
  double radians() const { return quarter_turns_ * std::numbers::pi / 2.0; }

  constexpr QuantizedPhase operator+(QuantizedPhase other) const {
    return QuantizedPhase(quarter_turns_ + other.quarter_turns_);
  }
  constexpr QuantizedPhase operator-(QuantizedPhase other) const {
    return QuantizedPhase(quarter_turns_ - other.quarter_turns_);
  }
  constexpr QuantizedPhase operator-() const { return QuantizedPhase(-quarter_turns_); }
  constexpr QuantizedPhase doubled() const { return QuantizedPhase(2 * quarter_turns_); }

  // e^{-i*phase}, taken from an exact table: {1, -i, -1, i}.
  std::complex<double> rotor() const {
    static constexpr std::array<std::complex<double>, 4> kTable = {
        std::complex<double>(1.0, 0.0), std::complex<double>(0.0, -1.0),
        std::complex<double>(-1.0, 0.0), std::complex<double>(0.0, 1.0)};
    return kTable[quarter_turns_];
  }

  std::string to_string() const {
    static constexpr std::array<const char*, 4> kNames = {"0", "pi/2", "pi", "3pi/2"};
    return kNames[quarter_turns_];
  }

  constexpr bool operator==(const QuantizedPhase&) const = default;

 private:
  int quarter_turns_ = 0;
};

}  // namespace dpsqkd
