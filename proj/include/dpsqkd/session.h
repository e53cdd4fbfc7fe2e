#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpsqkd/channel.h"
#include "dpsqkd/optics.h"
#include "dpsqkd/phase.h"
#include "dpsqkd/stations.h"

namespace dpsqkd {

struct SessionConfig {
  int n_stages = 3;
  std::uint64_t rounds = 100000;
  double source_mean_photons = 8.0;   // Bob's laser pulse before the cascade
  double mean_photons_return = 0.1;   // Alice's attenuation target
  double sample_prob = 0.1;
  double decoy_prob = 0.0;
  double energy_tolerance = 0.2;
  double max_check_error = 0.1;
  double max_qber = 0.11;
  double disclose_fraction = 0.1;
  DetectorParams detector;
  ChannelParams channel;
  EveKind eve = EveKind::none;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  // Energy Alice expects from an honest Bob through the channel.
  double expected_energy_at_alice() const;

  bool operator==(const SessionConfig&) const = default;
};

struct RoundRecord {
  std::uint64_t round = 0;
  QuantizedPhase alice_phase;
  QuantizedPhase bob_phase;
  bool energy_alarm = false;

  bool sampled = false;
  std::optional<QuantizedPhase> check_phase;
  std::vector<ClickEvent> check_clicks;
  int check_matched = 0;  // inner-slot check clicks whose basis matched
  int check_errors = 0;   // ... and whose detector differed from the prediction

  std::vector<Slot> decoy_positions;
  std::vector<ClickEvent> clicks;  // Bob's D1/D2 clicks
  bool multi_click = false;
  std::optional<ClickEvent> key_click;
  BitOutcome bob_bit = BitOutcome::discard;
  bool decoy_hit = false;

  std::optional<QuantizedPhase> eve_phase;

  // Bob's public announcement: a usable (non-edge) click happened.
  bool detected() const { return bob_bit != BitOutcome::discard; }
  bool operator==(const RoundRecord&) const = default;
};

// One protocol round. Randomness comes from per-(seed, round, lane) streams so
// rounds can be evaluated in any order. `eve` must be fresh or exclusively
// owned by this round.
RoundRecord run_round(const SessionConfig& config, std::uint64_t round_index, EveStrategy& eve);
RoundRecord run_round(const SessionConfig& config, std::uint64_t round_index);

using KeyBits = std::vector<std::uint8_t>;

struct SiftedKey {
  KeyBits alice;
  KeyBits bob;
  KeyBits eve;  // filled only when every kept round carries an Eve reading
  std::vector<std::uint64_t> rounds;

  bool operator==(const SiftedKey&) const = default;
};

// Keeps rounds with a usable click that were neither sampled nor hit by a decoy
// on the interfering pair.
bool keeps_key_bit(const RoundRecord& record);
SiftedKey sift(std::span<const RoundRecord> records);

struct QberEstimate {
  std::optional<double> qber;  // nullopt when there is nothing to disclose
  std::size_t disclosed = 0;
  KeyBits alice_remaining;
  KeyBits bob_remaining;
  std::vector<std::size_t> disclosed_positions;
};

// Discloses max(1, round(fraction * length)) random positions, reports their
// mismatch rate, and removes them from both keys. Throws for unequal lengths or
// a fraction outside (0, 1].
QberEstimate estimate_qber(const KeyBits& alice, const KeyBits& bob, double disclose_fraction, Rng& rng);

struct SessionStats {
  std::uint64_t rounds = 0;
  std::uint64_t sampled_rounds = 0;
  std::uint64_t single_click_rounds = 0;  // key rounds with exactly one click
  std::uint64_t multi_click_rounds = 0;
  std::uint64_t inner_clicks = 0;  // over single-click key rounds
  std::uint64_t edge_clicks = 0;
  std::uint64_t d1_clicks = 0;  // all Bob clicks
  std::uint64_t d2_clicks = 0;
  std::optional<double> efficiency;
  std::optional<double> edge_fraction;

  std::uint64_t sifted_length = 0;
  std::uint64_t sifted_mismatches = 0;
  std::uint64_t decoy_discards = 0;
  std::optional<double> qber;
  std::uint64_t disclosed_bits = 0;
  SiftedKey final_key;  // sifted key minus disclosed positions

  std::uint64_t check_matched_clicks = 0;
  std::uint64_t check_errors = 0;
  std::optional<double> check_error_rate;

  std::uint64_t energy_alarms = 0;
  std::optional<double> eve_agreement;  // Eve's bits vs Alice's over the sifted key
  bool insecure = false;

  bool operator==(const SessionStats&) const = default;
};

// Pure fold over round records.
class SessionAccumulator {
 public:
  void add(const RoundRecord& record);
  SessionStats finish(const SessionConfig& config) const;

 private:
  SessionStats partial_;
  SiftedKey sifted_;
  std::uint64_t eve_readings_ = 0;
  std::uint64_t eve_matches_ = 0;
};

SessionStats session_stats(std::span<const RoundRecord> records, const SessionConfig& config);

// Runs config.rounds rounds and folds them without keeping the records.
SessionStats run_session(const SessionConfig& config);
std::vector<RoundRecord> run_session_records(const SessionConfig& config);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& other) const { return num * other.den == other.num * den; }
  bool operator<(const Rational& other) const { return num * other.den < other.num * den; }
  bool operator>(const Rational& other) const { return other < *this; }
};

// (2^n - 1) / 2^n. Throws for n < 1 or n > 62.
Rational theoretical_efficiency(int n);
// n / (n + 1), the competing cascade's efficiency. Throws for n < 1.
Rational competitor_efficiency(int n);

// Noiseless round trip (prepare, encode, reflect, measure): fraction of output
// energy that lands in the inner slots.
double inner_energy_fraction(int n_stages, QuantizedPhase alice_phase, QuantizedPhase bob_phase);

// D1/D2 amplitudes of the noiseless round trip over slots 1 .. 2^n + 1,
// normalized so that slot 1 reads e^{-i phi_A} on both detectors.
struct InterferencePattern {
  std::vector<Slot> slots;
  std::vector<Complex> d1;
  std::vector<Complex> d2;
};

InterferencePattern interference_coefficients(int n_stages, QuantizedPhase alice_phase,
                                              QuantizedPhase bob_phase);

// Expected matched-basis check-error rate when every checked train is the
// flat-phase substitute, averaged over the eight (phi_B, phi'_A) pairs with
// exact click probabilities.
double attack_check_error_rate(const SessionConfig& config);

}  // namespace dpsqkd
