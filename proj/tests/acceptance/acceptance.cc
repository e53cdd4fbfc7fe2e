// Acceptance checks. One line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "dpsqkd/experiments.h"
#include "dpsqkd/session.h"
#include "oracles.h"

using namespace dpsqkd;

namespace {

// Pinned tolerances and bounds.
constexpr double kAmplitudeTol = 1e-10;
constexpr double kExactTol = 1e-12;
constexpr double kEfficiencyTol = 0.01;
constexpr double kEdgeTol = 0.01;
constexpr double kPolarizationTol = 1e-10;
constexpr std::uint64_t kMinSingleClickRounds = 100000;
constexpr std::uint64_t kEfficiencyRounds = 520000;
constexpr double kEfficiencyMu = 0.3;
constexpr std::uint64_t kNoiselessRounds = 10000;
constexpr std::uint64_t kAttackRounds = 10000;
constexpr int kUnitaries = 100;

constexpr double kPreparedBoundMs = 1.0;
constexpr double kTruthTableBoundMs = 10.0;
constexpr double kEfficiencyBoundMs = 30000.0;
constexpr double kNoiselessBoundMs = 10000.0;
constexpr double kAttackBoundMs = 60000.0;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

template <typename F>
void criterion(int id, const std::string& title, double bound_ms, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome{false, ""};
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream timing;
  timing << ms << " ms";
  if (bound_ms > 0.0) {
    timing << " (bound " << bound_ms << " ms)";
    if (ms > bound_ms) {
      outcome.pass = false;
      outcome.detail += "; too slow";
    }
  }
  if (!outcome.pass) ++failures;
  std::printf("[%s] criterion %d %s: %s [%s]\n", outcome.pass ? "PASS" : "FAIL", id, title.c_str(),
              outcome.detail.c_str(), timing.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

Outcome prepared_state() {
  double worst = 0.0;
  for (int b = 0; b < 4; ++b) {
    const QuantizedPhase bob(b);
    const PulseTrain train = bob_prepare(CascadeConfig(3, bob), Complex(1.0, 0.0));
    if (train.size() != 8) return {false, "expected 8 pulses, got " + std::to_string(train.size())};
    const auto expected = oracle::prepared_state(8, bob.radians());
    const Complex global = train.amplitude_at(1) / expected[0];
    for (Slot k = 1; k <= 8; ++k) {
      worst = std::max(worst, std::abs(train.amplitude_at(k) - global * expected[k - 1]));
      worst = std::max(worst, std::abs(std::abs(train.amplitude_at(k)) - 1.0 / 8.0));
    }
  }
  return {worst < kAmplitudeTol, "max deviation " + fmt(worst)};
}

Outcome truth_table() {
  double worst = 0.0;
  bool rule_holds = true;
  for (int a : {0, 2}) {
    for (int b = 0; b < 4; ++b) {
      const InterferencePattern pattern = interference_coefficients(3, QuantizedPhase(a), QuantizedPhase(b));
      const auto d1 = oracle::return_d1_coefficients(oracle::quarter(a), oracle::quarter(b));
      const auto d2 = oracle::return_d2_coefficients(oracle::quarter(a), oracle::quarter(b));
      for (std::size_t k = 0; k < 9; ++k) {
        worst = std::max({worst, std::abs(pattern.d1[k] - d1[k]), std::abs(pattern.d2[k] - d2[k])});
      }
      // An inner-slot D1 click reads 2 phi_B (odd slot) or 0 (even slot); D2 adds pi.
      const CascadeConfig cascade(3, QuantizedPhase(b));
      for (std::size_t k = 1; k + 1 < 9; ++k) {
        const Slot slot = pattern.slots[k];
        const bool d1_lit = std::norm(pattern.d1[k]) > kAmplitudeTol;
        const bool d2_lit = std::norm(pattern.d2[k]) > kAmplitudeTol;
        if (d1_lit == d2_lit) {
          rule_holds = false;
          continue;
        }
        const QuantizedPhase base = slot % 2 == 1 ? QuantizedPhase(b).doubled() : QuantizedPhase::zero();
        const QuantizedPhase read = d1_lit ? base : base + QuantizedPhase::pi();
        rule_holds = rule_holds && read == QuantizedPhase(a);
        rule_holds = rule_holds && infer_bit({d1_lit ? Detector::D1 : Detector::D2, slot}, cascade) ==
                                       bit_for_key_phase(QuantizedPhase(a));
      }
    }
  }
  return {worst < kAmplitudeTol && rule_holds,
          "max coefficient deviation " + fmt(worst) + ", phase rule " + (rule_holds ? "holds" : "violated")};
}

SessionConfig efficiency_config() {
  SessionConfig config;
  config.n_stages = 3;
  config.rounds = kEfficiencyRounds;
  config.mean_photons_return = kEfficiencyMu;
  config.sample_prob = 0.0;
  config.seed = 20240601;
  return config;
}

SessionStats efficiency_stats;

Outcome efficiency() {
  double worst = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const double exact = theoretical_efficiency(n).value();
    for (int a : {0, 2}) {
      for (int b = 0; b < 4; ++b) {
        worst = std::max(worst, std::abs(inner_energy_fraction(n, QuantizedPhase(a), QuantizedPhase(b)) - exact));
      }
    }
  }
  efficiency_stats = run_session(efficiency_config());
  const std::uint64_t singles = efficiency_stats.single_click_rounds;
  const double measured = efficiency_stats.efficiency.value_or(0.0);
  const bool pass = worst < kExactTol && singles >= kMinSingleClickRounds &&
                    std::abs(measured - 7.0 / 8.0) < kEfficiencyTol;
  return {pass, "energy fraction deviation " + fmt(worst) + ", measured " + fmt(measured) + " over " +
                    std::to_string(singles) + " single-click rounds (target 0.875 +- " + fmt(kEfficiencyTol) + ")"};
}

Outcome rationals() {
  for (int n = 2; n <= 20; ++n) {
    const Rational ours = theoretical_efficiency(n);
    const Rational other = competitor_efficiency(n);
    const bool exact = ours.num == (std::int64_t{1} << n) - 1 && ours.den == (std::int64_t{1} << n) &&
                       other.num == n && other.den == n + 1;
    if (!exact || !(ours > other)) return {false, "comparison fails at n=" + std::to_string(n)};
  }
  return {true, "(2^n-1)/2^n > n/(n+1) for n = 2..20"};
}

Outcome zero_mismatches() {
  SessionConfig config;
  config.rounds = kNoiselessRounds;
  config.seed = 99;
  const SessionStats stats = run_session(config);
  return {stats.sifted_mismatches == 0 && stats.sifted_length > 0,
          std::to_string(stats.sifted_mismatches) + " mismatches in " + std::to_string(stats.sifted_length) +
              " sifted bits"};
}

Outcome faraday() {
  const PulseTrain train = bob_prepare(CascadeConfig(3, QuantizedPhase::half_pi()), Complex(1.0, 0.0));
  const PulseTrain ideal = faraday_reflect(train);
  Rng rng(4242);
  double worst = 0.0;
  for (int i = 0; i < kUnitaries; ++i) {
    const JonesMatrix unitary = random_unitary(rng);
    const PulseTrain back = jones_apply(faraday_reflect(jones_apply(train, unitary)), reverse_pass(unitary));
    // Polarization equal up to one global phase shared by all slots.
    const Complex global = inner_product(ideal.find(1)->polarization, back.find(1)->polarization);
    for (const auto& [slot, pulse] : back) {
      const JonesVector& target = ideal.find(slot)->polarization;
      worst = std::max(worst, norm(JonesVector{pulse.polarization[0] - global * target[0],
                                               pulse.polarization[1] - global * target[1]}));
    }
  }

  SessionConfig config;
  config.rounds = 20000;
  config.seed = 7;
  config.sample_prob = 0.0;
  SessionConfig twisted = config;
  twisted.channel.birefringence_mode = BirefringenceMode::random_per_train;
  const SessionStats plain = run_session(config);
  const SessionStats rotated = run_session(twisted);
  const bool same_stats = plain.d1_clicks == rotated.d1_clicks && plain.d2_clicks == rotated.d2_clicks &&
                          plain.final_key == rotated.final_key;
  return {worst < kPolarizationTol && same_stats,
          "max polarization difference " + fmt(worst) + " over " + std::to_string(kUnitaries) +
              " unitaries; detector statistics " + (same_stats ? "identical" : "differ") + " (D1 " +
              std::to_string(plain.d1_clicks) + "/" + std::to_string(rotated.d1_clicks) + ", D2 " +
              std::to_string(plain.d2_clicks) + "/" + std::to_string(rotated.d2_clicks) + ")"};
}

Outcome attack() {
  SessionConfig base;
  base.rounds = kAttackRounds;
  base.seed = 31337;
  base.eve = EveKind::intercept_resend_reference;

  SessionConfig off = base;
  off.sample_prob = 0.0;
  SessionConfig on = base;
  on.sample_prob = 0.2;

  // Expected rate is fixed before any simulation runs.
  const double expected = oracle::flat_attack_check_error(8, on.expected_energy_at_alice(),
                                                          on.detector.quantum_efficiency);

  const SessionStats blind = run_session(off);
  const SessionStats checked = run_session(on);
  const bool blind_ok = blind.qber && *blind.qber == 0.0 && blind.sifted_mismatches == 0 &&
                        blind.eve_agreement && *blind.eve_agreement == 1.0 && blind.energy_alarms == 0;
  const double matched = static_cast<double>(checked.check_matched_clicks);
  const double rate = checked.check_error_rate.value_or(0.0);
  const double se = matched > 0 ? std::sqrt(expected * (1.0 - expected) / matched) : 1.0;
  const bool caught = matched > 0 && rate > expected - 3.0 * se && checked.insecure;
  return {blind_ok && caught,
          "checks off: qber " + fmt(blind.qber.value_or(-1)) + ", Eve agreement " +
              fmt(blind.eve_agreement.value_or(-1)) + "; checks on: error rate " + fmt(rate) + " over " +
              std::to_string(checked.check_matched_clicks) + " matched clicks (expected " + fmt(expected) +
              ", floor " + fmt(expected - 3.0 * se) + ")"};
}

Outcome edge_fraction() {
  const double measured = efficiency_stats.edge_fraction.value_or(-1.0);
  return {std::abs(measured - 1.0 / 8.0) < kEdgeTol,
          "edge fraction " + fmt(measured) + " (target 0.125 +- " + fmt(kEdgeTol) + ")"};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Outcome csv_reproducible() {
  const auto specs = parse_config_text(R"({"seed": 12, "experiments": [
    {"name": "baseline", "rounds": 5000},
    {"name": "efficiency_scan", "n_values": [1, 2, 3], "rounds": 2000},
    {"name": "attack_demo", "rounds": 2000}
  ]})");
  const auto dir = std::filesystem::temp_directory_path() / "dpsqkd_acceptance_csv";
  std::filesystem::create_directories(dir);
  bool identical = true;
  std::size_t bytes = 0;
  for (const ExperimentSpec& spec : specs) {
    const auto first = dir / (spec.output_stem + "_a.csv");
    const auto second = dir / (spec.output_stem + "_b.csv");
    emit(run_experiment(spec), OutputFormat::csv, first);
    emit(run_experiment(spec), OutputFormat::csv, second);
    const std::string a = slurp(first);
    identical = identical && !a.empty() && a == slurp(second);
    bytes += a.size();
  }
  std::filesystem::remove_all(dir);
  return {identical, std::to_string(specs.size()) + " experiments, " + std::to_string(bytes) + " bytes, " +
                         (identical ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main() {
  criterion(1, "prepared eight-pulse state", kPreparedBoundMs, prepared_state);
  criterion(2, "return interference truth table", kTruthTableBoundMs, truth_table);
  criterion(3, "inner-slot efficiency 7/8", kEfficiencyBoundMs, efficiency);
  criterion(4, "efficiency beats n/(n+1) for n=2..20", 0.0, rationals);
  criterion(5, "zero mismatches without noise", kNoiselessBoundMs, zero_mismatches);
  criterion(6, "Faraday mirror compensation", 0.0, faraday);
  criterion(7, "reference-pulse attack: invisible, then caught", kAttackBoundMs, attack);
  criterion(8, "edge-slot fraction 1/8", 0.0, edge_fraction);
  criterion(9, "CSV output reproducible", 0.0, csv_reproducible);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
