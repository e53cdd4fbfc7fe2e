#include "dpsqkd/session.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dpsqkd {

namespace {

void require_unit_interval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be finite and >= 0, got " + std::to_string(value));
  }
}

std::uint8_t bit_value(BitOutcome outcome) { return outcome == BitOutcome::bit1 ? 1 : 0; }

std::optional<double> ratio(std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) return std::nullopt;
  return static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

void SessionConfig::validate() const {
  if (n_stages < 1 || n_stages > kMaxStages) {
    throw std::invalid_argument("n_stages must lie in [1, " + std::to_string(kMaxStages) + "], got " +
                                std::to_string(n_stages));
  }
  if (rounds < 1) {
    throw std::invalid_argument("rounds must be >= 1");
  }
  if (!(source_mean_photons > 0.0) || !std::isfinite(source_mean_photons)) {
    throw std::invalid_argument("source_mean_photons must be finite and > 0");
  }
  require_non_negative(mean_photons_return, "mean_photons");
  require_unit_interval(sample_prob, "sample_prob");
  require_unit_interval(decoy_prob, "decoy_prob");
  require_non_negative(energy_tolerance, "energy_tolerance");
  require_unit_interval(max_check_error, "max_check_error");
  require_unit_interval(max_qber, "max_qber");
  if (!(disclose_fraction > 0.0 && disclose_fraction <= 1.0)) {
    throw std::invalid_argument("disclose_fraction must lie in (0, 1]");
  }
  detector.validate();
  channel.validate();
}

double SessionConfig::expected_energy_at_alice() const {
  return source_mean_photons / static_cast<double>(Slot{1} << n_stages) * channel.transmittance();
}

RoundRecord run_round(const SessionConfig& config, std::uint64_t round_index, EveStrategy& eve) {
  Rng choices = Rng::stream(config.seed, round_index, RngLane::kChoices);
  Rng channel_rng = Rng::stream(config.seed, round_index, RngLane::kChannel);
  Rng eve_rng = Rng::stream(config.seed, round_index, RngLane::kEve);

  RoundRecord record;
  record.round = round_index;
  record.bob_phase = QuantizedPhase(static_cast<int>(choices.below(4)));
  record.alice_phase = key_phase_for_bit(static_cast<int>(choices.below(2)));
  const QuantizedPhase check_phase(static_cast<int>(choices.below(2)));
  const QuantizedPhase decoy_phase(static_cast<int>(choices.below(2)));

  const CascadeConfig cascade(config.n_stages, record.bob_phase);
  const Fiber fiber(config.channel, channel_rng);
  const bool eve_present = eve.kind() != EveKind::none;

  // Bob -> fiber -> (Eve) -> Alice.
  PulseTrain train = bob_prepare(cascade, Complex(std::sqrt(config.source_mean_photons), 0.0));
  train = fiber.transmit(train, Direction::forward);
  if (eve_present) {
    train = eve.forward_hook(train, eve_rng);
  }

  record.energy_alarm =
      alice_energy_monitor(train, config.expected_energy_at_alice(), config.energy_tolerance);

  if (config.sample_prob > 0.0) {
    Rng check_rng = Rng::stream(config.seed, round_index, RngLane::kAliceCheck);
    CheckResult check = alice_sample_and_check(train, config.sample_prob, check_phase, config.detector, check_rng);
    if (check.sampled) {
      record.sampled = true;
      record.check_phase = check_phase;
      for (const ClickEvent& click : check.check_clicks) {
        if (!cascade.is_inner_slot(click.slot)) continue;
        const CheckPrediction predicted =
            check_expected_outcome(record.bob_phase, check_phase, lead_parity(click.slot));
        if (predicted == CheckPrediction::unmatched) continue;
        ++record.check_matched;
        const Detector expected = predicted == CheckPrediction::D3 ? Detector::D3 : Detector::D4;
        if (click.detector != expected) ++record.check_errors;
      }
      record.check_clicks = std::move(check.check_clicks);
      return record;
    }
  }

  // Alice: attenuate, encode (with decoys), reflect.
  if (train.total_energy() == 0.0) {
    train = PulseTrain(train.slot_duration());
  } else {
    train = attenuate(train, config.mean_photons_return);
  }
  if (config.decoy_prob > 0.0) {
    Rng decoy_rng = Rng::stream(config.seed, round_index, RngLane::kDecoy);
    DecoyResult decoyed =
        alice_decoy_replace(train, record.alice_phase, config.decoy_prob, decoy_phase, decoy_rng);
    train = std::move(decoyed.train);
    record.decoy_positions = std::move(decoyed.decoy_positions);
  } else {
    train = alice_encode(train, record.alice_phase);
  }
  train = faraday_reflect(train);

  // (Eve) -> fiber -> Bob.
  if (eve_present) {
    train = eve.backward_hook(train, eve_rng);
    record.eve_phase = eve.inferred_key_phase();
  }
  train = fiber.transmit(train, Direction::backward);

  BobPorts ports = bob_measure(train, cascade);
  const std::array<DetectorBranch, 2> branches = {DetectorBranch{Detector::D1, std::move(ports.d1)},
                                                  DetectorBranch{Detector::D2, std::move(ports.d2)}};
  Rng detect_rng = Rng::stream(config.seed, round_index, RngLane::kBobDetect);
  record.clicks = detect(branches, config.detector, detect_rng);

  if (record.clicks.size() == 1) {
    record.key_click = record.clicks.front();
  } else if (record.clicks.size() > 1) {
    record.multi_click = true;
    if (config.detector.double_click_policy == DoubleClickPolicy::random_pick) {
      record.key_click = record.clicks[detect_rng.below(record.clicks.size())];
    }
  }

  if (record.key_click) {
    record.bob_bit = infer_bit(*record.key_click, cascade);
    const Slot slot = record.key_click->slot;
    record.decoy_hit = std::any_of(record.decoy_positions.begin(), record.decoy_positions.end(),
                                   [slot](Slot decoy) { return decoy == slot || decoy == slot - 1; });
  }
  return record;
}

RoundRecord run_round(const SessionConfig& config, std::uint64_t round_index) {
  EveStrategy eve(config.eve);
  return run_round(config, round_index, eve);
}

bool keeps_key_bit(const RoundRecord& record) {
  return !record.sampled && record.detected() && !record.decoy_hit;
}

SiftedKey sift(std::span<const RoundRecord> records) {
  SiftedKey key;
  bool eve_complete = true;
  for (const RoundRecord& record : records) {
    if (!keeps_key_bit(record)) continue;
    key.alice.push_back(bit_value(bit_for_key_phase(record.alice_phase)));
    key.bob.push_back(bit_value(record.bob_bit));
    key.rounds.push_back(record.round);
    if (record.eve_phase && (*record.eve_phase == QuantizedPhase::zero() ||
                             *record.eve_phase == QuantizedPhase::pi())) {
      key.eve.push_back(bit_value(bit_for_key_phase(*record.eve_phase)));
    } else {
      eve_complete = false;
    }
  }
  if (!eve_complete) key.eve.clear();
  return key;
}

QberEstimate estimate_qber(const KeyBits& alice, const KeyBits& bob, double disclose_fraction, Rng& rng) {
  if (alice.size() != bob.size()) {
    throw std::invalid_argument("estimate_qber: keys must have equal length");
  }
  if (!(disclose_fraction > 0.0 && disclose_fraction <= 1.0)) {
    throw std::invalid_argument("estimate_qber: disclose_fraction must lie in (0, 1]");
  }
  QberEstimate estimate;
  const std::size_t length = alice.size();
  if (length == 0) {
    return estimate;
  }
  const auto wanted = static_cast<std::size_t>(std::llround(disclose_fraction * static_cast<double>(length)));
  const std::size_t count = std::clamp<std::size_t>(wanted, 1, length);

  // Partial Fisher-Yates over positions.
  std::vector<std::size_t> positions(length);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(length - i));
    std::swap(positions[i], positions[j]);
  }
  positions.resize(count);
  std::sort(positions.begin(), positions.end());

  std::vector<bool> disclosed(length, false);
  std::size_t mismatches = 0;
  for (const std::size_t pos : positions) {
    disclosed[pos] = true;
    if (alice[pos] != bob[pos]) ++mismatches;
  }
  for (std::size_t i = 0; i < length; ++i) {
    if (disclosed[i]) continue;
    estimate.alice_remaining.push_back(alice[i]);
    estimate.bob_remaining.push_back(bob[i]);
  }
  estimate.disclosed = count;
  estimate.disclosed_positions = std::move(positions);
  estimate.qber = static_cast<double>(mismatches) / static_cast<double>(count);
  return estimate;
}

void SessionAccumulator::add(const RoundRecord& record) {
  SessionStats& s = partial_;
  ++s.rounds;
  if (record.energy_alarm) ++s.energy_alarms;
  if (record.sampled) {
    ++s.sampled_rounds;
    s.check_matched_clicks += static_cast<std::uint64_t>(record.check_matched);
    s.check_errors += static_cast<std::uint64_t>(record.check_errors);
    return;
  }
  for (const ClickEvent& click : record.clicks) {
    if (click.detector == Detector::D1) ++s.d1_clicks;
    if (click.detector == Detector::D2) ++s.d2_clicks;
  }
  if (record.multi_click) ++s.multi_click_rounds;
  if (record.clicks.size() == 1) {
    ++s.single_click_rounds;
    if (record.bob_bit == BitOutcome::discard) {
      ++s.edge_clicks;
    } else {
      ++s.inner_clicks;
    }
  }
  if (record.detected() && record.decoy_hit) ++s.decoy_discards;
  if (!keeps_key_bit(record)) return;

  const std::uint8_t alice_bit = bit_value(bit_for_key_phase(record.alice_phase));
  const std::uint8_t bob_bit = bit_value(record.bob_bit);
  sifted_.alice.push_back(alice_bit);
  sifted_.bob.push_back(bob_bit);
  sifted_.rounds.push_back(record.round);
  if (alice_bit != bob_bit) ++s.sifted_mismatches;
  if (record.eve_phase) {
    ++eve_readings_;
    if (*record.eve_phase == record.alice_phase) ++eve_matches_;
  }
}

SessionStats SessionAccumulator::finish(const SessionConfig& config) const {
  SessionStats s = partial_;
  s.efficiency = ratio(s.inner_clicks, s.inner_clicks + s.edge_clicks);
  s.edge_fraction = ratio(s.edge_clicks, s.inner_clicks + s.edge_clicks);
  s.check_error_rate = ratio(s.check_errors, s.check_matched_clicks);
  s.sifted_length = sifted_.alice.size();
  if (eve_readings_ == s.sifted_length) {
    s.eve_agreement = ratio(eve_matches_, eve_readings_);
  }

  Rng disclosure = Rng::stream(config.seed, s.rounds, RngLane::kDisclosure);
  const QberEstimate estimate = estimate_qber(sifted_.alice, sifted_.bob, config.disclose_fraction, disclosure);
  s.qber = estimate.qber;
  s.disclosed_bits = estimate.disclosed;
  s.final_key.alice = estimate.alice_remaining;
  s.final_key.bob = estimate.bob_remaining;
  for (std::size_t i = 0, next = 0; i < sifted_.rounds.size(); ++i) {
    if (next < estimate.disclosed_positions.size() && estimate.disclosed_positions[next] == i) {
      ++next;
      continue;
    }
    s.final_key.rounds.push_back(sifted_.rounds[i]);
  }

  s.insecure = s.energy_alarms > 0 || (s.check_error_rate && *s.check_error_rate > config.max_check_error) ||
               (s.qber && *s.qber > config.max_qber);
  return s;
}

SessionStats session_stats(std::span<const RoundRecord> records, const SessionConfig& config) {
  SessionAccumulator accumulator;
  for (const RoundRecord& record : records) {
    accumulator.add(record);
  }
  return accumulator.finish(config);
}

SessionStats run_session(const SessionConfig& config) {
  config.validate();
  SessionAccumulator accumulator;
  for (std::uint64_t round = 0; round < config.rounds; ++round) {
    accumulator.add(run_round(config, round));
  }
  return accumulator.finish(config);
}

std::vector<RoundRecord> run_session_records(const SessionConfig& config) {
  config.validate();
  std::vector<RoundRecord> records;
  records.reserve(config.rounds);
  for (std::uint64_t round = 0; round < config.rounds; ++round) {
    records.push_back(run_round(config, round));
  }
  return records;
}

Rational theoretical_efficiency(int n) {
  if (n < 1 || n > 62) {
    throw std::invalid_argument("theoretical_efficiency: n must lie in [1, 62], got " + std::to_string(n));
  }
  const std::int64_t pulses = std::int64_t{1} << n;
  return Rational{pulses - 1, pulses};
}

Rational competitor_efficiency(int n) {
  if (n < 1) {
    throw std::invalid_argument("competitor_efficiency: n must be >= 1, got " + std::to_string(n));
  }
  return Rational{n, n + 1};
}

namespace {

BobPorts noiseless_return(int n_stages, QuantizedPhase alice_phase, QuantizedPhase bob_phase,
                          Complex* first_prepared) {
  const CascadeConfig cascade(n_stages, bob_phase);
  const PulseTrain prepared = bob_prepare(cascade, Complex(1.0, 0.0));
  if (first_prepared) *first_prepared = prepared.amplitude_at(cascade.first_slot());
  return bob_measure(faraday_reflect(alice_encode(prepared, alice_phase)), cascade);
}

}  // namespace

double inner_energy_fraction(int n_stages, QuantizedPhase alice_phase, QuantizedPhase bob_phase) {
  const CascadeConfig cascade(n_stages, bob_phase);
  const BobPorts ports = noiseless_return(n_stages, alice_phase, bob_phase, nullptr);
  double inner = 0.0;
  double total = 0.0;
  for (const PulseTrain* port : {&ports.d1, &ports.d2}) {
    for (const auto& [slot, pulse] : *port) {
      total += pulse.energy();
      if (cascade.is_inner_slot(slot)) inner += pulse.energy();
    }
  }
  return inner / total;
}

InterferencePattern interference_coefficients(int n_stages, QuantizedPhase alice_phase,
                                              QuantizedPhase bob_phase) {
  const CascadeConfig cascade(n_stages, bob_phase);
  Complex first(0.0, 0.0);
  const BobPorts ports = noiseless_return(n_stages, alice_phase, bob_phase, &first);
  const Complex d1_scale = Complex(0.0, 1.0) * first / 2.0;
  const Complex d2_scale = first / 2.0;

  InterferencePattern pattern;
  for (Slot slot = cascade.first_slot(); slot <= cascade.last_slot(); ++slot) {
    pattern.slots.push_back(slot);
    pattern.d1.push_back(ports.d1.amplitude_at(slot) / d1_scale);
    pattern.d2.push_back(ports.d2.amplitude_at(slot) / d2_scale);
  }
  return pattern;
}

double attack_check_error_rate(const SessionConfig& config) {
  config.validate();
  double expected_errors = 0.0;
  double expected_matched = 0.0;
  for (int bob = 0; bob < 4; ++bob) {
    const CascadeConfig cascade(config.n_stages, QuantizedPhase(bob));
    PulseTrain honest = bob_prepare(cascade, Complex(std::sqrt(config.source_mean_photons), 0.0));
    honest = scale_amplitudes(honest, std::sqrt(config.channel.transmittance()));
    const PulseTrain substitute = flat_substitute(honest);
    for (const QuantizedPhase check : {QuantizedPhase::zero(), QuantizedPhase::half_pi()}) {
      const MziPorts ports = mzi_pass(substitute, 1, check);
      for (Slot slot = cascade.first_slot() + 1; slot < cascade.last_slot(); ++slot) {
        const CheckPrediction predicted = check_expected_outcome(QuantizedPhase(bob), check, lead_parity(slot));
        if (predicted == CheckPrediction::unmatched) continue;
        const double p3 = click_probability(ports.port2.energy_at(slot), config.detector);
        const double p4 = click_probability(ports.port1.energy_at(slot), config.detector);
        expected_matched += p3 + p4;
        expected_errors += predicted == CheckPrediction::D3 ? p4 : p3;
      }
    }
  }
  return expected_matched > 0.0 ? expected_errors / expected_matched : 0.0;
}

}  // namespace dpsqkd
