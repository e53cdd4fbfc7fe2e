#pragma once

// Test-only reference computations. Everything here is written from the
// closed-form optics (explicit 2x2 matrices, dense slot arrays, interference
// coefficients) and deliberately avoids the library's propagation code.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

inline Complex phase_factor(double radians) { return std::polar(1.0, -radians); }
inline double quarter(int k) { return k * std::numbers::pi / 2.0; }

// Coupler matrix [[1, i], [i, 1]] / sqrt(2) applied by explicit multiplication.
inline std::array<Complex, 2> coupler(Complex a, Complex b) {
  const double s = 1.0 / std::sqrt(2.0);
  const std::array<std::array<Complex, 2>, 2> m = {{{Complex(s, 0), Complex(0, s)}, {Complex(0, s), Complex(s, 0)}}};
  return {m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b};
}

struct DensePorts {
  std::vector<Complex> port1;
  std::vector<Complex> port2;
};

// Dense-array MZI: input indexed by slot 0..N-1, outputs 0..N-1+delay.
inline DensePorts mzi(const std::vector<Complex>& input, int delay, double long_phase) {
  const std::size_t out_len = input.size() + static_cast<std::size_t>(delay);
  std::vector<Complex> short_arm(out_len), long_arm(out_len);
  for (std::size_t k = 0; k < input.size(); ++k) {
    const auto split = coupler(input[k], Complex(0, 0));
    short_arm[k] += split[0];
    long_arm[k + static_cast<std::size_t>(delay)] += split[1] * phase_factor(long_phase);
  }
  DensePorts out{std::vector<Complex>(out_len), std::vector<Complex>(out_len)};
  for (std::size_t k = 0; k < out_len; ++k) {
    const auto mixed = coupler(short_arm[k], long_arm[k]);
    out.port1[k] = mixed[0];
    out.port2[k] = mixed[1];
  }
  return out;
}

// Eight-pulse prepared state up to a global factor: slots t1..t8 with phase 0
// on odd and phi_B on even slots.
inline std::vector<Complex> prepared_state(int pulses, double phi_b) {
  std::vector<Complex> state(pulses);
  for (int k = 1; k <= pulses; ++k) state[k - 1] = (k % 2 == 1) ? Complex(1, 0) : phase_factor(phi_b);
  return state;
}

// Alice-encoded state: odd slots pick up phi_A.
inline std::vector<Complex> encoded_state(int pulses, double phi_a, double phi_b) {
  std::vector<Complex> state(pulses);
  for (int k = 1; k <= pulses; ++k) state[k - 1] = (k % 2 == 1) ? phase_factor(phi_a) : phase_factor(phi_b);
  return state;
}

// D1 coefficients of the return interference, slots t1..t9:
//   e^{-i phi_A} |t1> + e^{-i phi_B}(1 + e^{-i phi_A})(|t2>+|t4>+|t6>+|t8>)
//   + (e^{-2i phi_B} + e^{-i phi_A})(|t3>+|t5>+|t7>) + e^{-2i phi_B} |t9>
inline std::array<Complex, 9> return_d1_coefficients(double phi_a, double phi_b) {
  std::array<Complex, 9> c{};
  const Complex a = phase_factor(phi_a);
  const Complex b = phase_factor(phi_b);
  c[0] = a;
  for (int k : {2, 4, 6, 8}) c[k - 1] = b * (1.0 + a);
  for (int k : {3, 5, 7}) c[k - 1] = b * b + a;
  c[8] = b * b;
  return c;
}

// Companion D2 coefficients (difference port).
inline std::array<Complex, 9> return_d2_coefficients(double phi_a, double phi_b) {
  std::array<Complex, 9> c{};
  const Complex a = phase_factor(phi_a);
  const Complex b = phase_factor(phi_b);
  c[0] = a;
  for (int k : {2, 4, 6, 8}) c[k - 1] = b * (1.0 - a);
  for (int k : {3, 5, 7}) c[k - 1] = a - b * b;
  c[8] = -b * b;
  return c;
}

inline double click_prob(double energy, double eta = 1.0) { return 1.0 - std::exp(-eta * energy); }

// Matched-basis check-error rate when Alice checks Eve's flat-phase train.
// Enumerates phi_B in {0, pi/2, pi, 3pi/2} x phi'_A in {0, pi/2}. For each
// inner slot of the check interferometer the honest pair coefficient decides
// the basis (|c|^2 = 4 -> D3, 0 -> D4, otherwise unmatched); Eve's flat pair
// lands D3/D4 with energies |1 +- e^{-i phi'}|^2 / 4 per unit pulse energy.
inline double flat_attack_check_error(int pulses, double per_pulse_energy, double eta = 1.0) {
  double errors = 0.0;
  double matched = 0.0;
  for (int b = 0; b < 4; ++b) {
    for (int c = 0; c < 2; ++c) {
      const Complex rb = phase_factor(quarter(b));
      const Complex rc = phase_factor(quarter(c));
      const double e3 = per_pulse_energy * std::norm(1.0 + rc) / 4.0;
      const double e4 = per_pulse_energy * std::norm(1.0 - rc) / 4.0;
      for (int slot = 2; slot <= pulses; ++slot) {
        const bool even_slot = slot % 2 == 0;
        // Honest pair (slot-1, slot): x(slot) + e^{-i phi'} x(slot-1).
        const Complex honest = even_slot ? rb + rc : 1.0 + rb * rc;
        const double weight = std::norm(honest);
        bool expect_d3;
        if (std::abs(weight - 4.0) < 1e-9) {
          expect_d3 = true;
        } else if (weight < 1e-9) {
          expect_d3 = false;
        } else {
          continue;
        }
        const double p3 = click_prob(e3, eta);
        const double p4 = click_prob(e4, eta);
        matched += p3 + p4;
        errors += expect_d3 ? p4 : p3;
      }
    }
  }
  return errors / matched;
}

}  // namespace oracle
