#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpsqkd/experiments.h"

namespace dpsqkd {

namespace {

using nlohmann::json;

std::string describe(const json& value) { return value.dump(); }

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw ConfigError("config key '" + key + "': " + message);
}

double read_real(const json& value, const std::string& key, double lo, double hi) {
  if (!value.is_number()) fail(key, "expected a number, got " + describe(value));
  const double x = value.get<double>();
  if (!(x >= lo && x <= hi)) {
    std::ostringstream range;
    range << "value " << describe(value) << " out of range [" << lo << ", ";
    if (hi == std::numeric_limits<double>::max()) {
      range << "inf)";
    } else {
      range << hi << "]";
    }
    fail(key, range.str());
  }
  return x;
}

std::uint64_t read_unsigned(const json& value, const std::string& key, std::uint64_t lo, std::uint64_t hi) {
  if (!value.is_number_integer()) fail(key, "expected an integer, got " + describe(value));
  if (value.is_number_unsigned()) {
    const auto x = value.get<std::uint64_t>();
    if (x < lo || x > hi) {
      fail(key, "value " + describe(value) + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
  }
  const auto x = value.get<std::int64_t>();
  if (x < 0 || static_cast<std::uint64_t>(x) < lo || static_cast<std::uint64_t>(x) > hi) {
    fail(key, "value " + describe(value) + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<std::uint64_t>(x);
}

std::string read_string(const json& value, const std::string& key) {
  if (!value.is_string()) fail(key, "expected a string, got " + describe(value));
  return value.get<std::string>();
}

constexpr double kInf = std::numeric_limits<double>::max();
constexpr std::uint64_t kMaxU64 = std::numeric_limits<std::uint64_t>::max();

void apply_detector(const json& object, DetectorParams& detector, const std::string& prefix) {
  if (!object.is_object()) fail(prefix, "expected an object");
  for (const auto& [name, value] : object.items()) {
    const std::string key = prefix + "." + name;
    if (name == "quantum_efficiency") {
      detector.quantum_efficiency = read_real(value, key, 0.0, 1.0);
    } else if (name == "dark_count_prob") {
      detector.dark_count_prob = read_real(value, key, 0.0, 1.0);
    } else if (name == "double_click_policy") {
      const std::string policy = read_string(value, key);
      if (policy == "discard_round") {
        detector.double_click_policy = DoubleClickPolicy::discard_round;
      } else if (policy == "random_pick") {
        detector.double_click_policy = DoubleClickPolicy::random_pick;
      } else {
        fail(key, "unknown policy '" + policy + "' (expected discard_round or random_pick)");
      }
    } else {
      fail(key, "unknown key");
    }
  }
}

void apply_channel(const json& object, ChannelParams& channel, const std::string& prefix) {
  if (!object.is_object()) fail(prefix, "expected an object");
  for (const auto& [name, value] : object.items()) {
    const std::string key = prefix + "." + name;
    if (name == "loss_db") {
      channel.loss_db = read_real(value, key, 0.0, kInf);
    } else if (name == "birefringence") {
      const std::string mode = read_string(value, key);
      if (mode == "none") {
        channel.birefringence_mode = BirefringenceMode::none;
      } else if (mode == "fixed_unitary") {
        channel.birefringence_mode = BirefringenceMode::fixed_unitary;
      } else if (mode == "random_per_train") {
        channel.birefringence_mode = BirefringenceMode::random_per_train;
      } else {
        fail(key, "unknown birefringence mode '" + mode + "'");
      }
    } else if (name == "unitary_seed") {
      channel.unitary_seed = read_unsigned(value, key, 0, kMaxU64);
    } else {
      fail(key, "unknown key");
    }
  }
}

// Returns false for keys that are not session keys.
bool apply_session_key(const std::string& name, const json& value, SessionConfig& config,
                       const std::string& prefix) {
  const std::string key = prefix.empty() ? name : prefix + "." + name;
  if (name == "n_stages") {
    config.n_stages = static_cast<int>(read_unsigned(value, key, 1, kMaxStages));
  } else if (name == "rounds") {
    config.rounds = read_unsigned(value, key, 1, kMaxU64);
  } else if (name == "seed") {
    config.seed = read_unsigned(value, key, 0, kMaxU64);
  } else if (name == "source_mean_photons") {
    config.source_mean_photons = read_real(value, key, std::numeric_limits<double>::min(), kInf);
  } else if (name == "mean_photons") {
    config.mean_photons_return = read_real(value, key, 0.0, kInf);
  } else if (name == "sample_prob") {
    config.sample_prob = read_real(value, key, 0.0, 1.0);
  } else if (name == "decoy_prob") {
    config.decoy_prob = read_real(value, key, 0.0, 1.0);
  } else if (name == "energy_tolerance") {
    config.energy_tolerance = read_real(value, key, 0.0, kInf);
  } else if (name == "max_check_error") {
    config.max_check_error = read_real(value, key, 0.0, 1.0);
  } else if (name == "max_qber") {
    config.max_qber = read_real(value, key, 0.0, 1.0);
  } else if (name == "disclose_fraction") {
    config.disclose_fraction = read_real(value, key, std::numeric_limits<double>::min(), 1.0);
  } else if (name == "eve") {
    const std::string kind = read_string(value, key);
    if (kind == "none") {
      config.eve = EveKind::none;
    } else if (kind == "passive") {
      config.eve = EveKind::passive;
    } else if (kind == "intercept_resend_reference") {
      config.eve = EveKind::intercept_resend_reference;
    } else {
      fail(key, "unknown eve strategy '" + kind + "'");
    }
  } else if (name == "detector") {
    apply_detector(value, config.detector, key);
  } else if (name == "channel") {
    apply_channel(value, config.channel, key);
  } else {
    return false;
  }
  return true;
}

std::vector<int> read_n_values(const json& value, const std::string& key) {
  if (!value.is_array() || value.empty()) fail(key, "expected a non-empty array of stage counts");
  std::vector<int> values;
  for (std::size_t i = 0; i < value.size(); ++i) {
    values.push_back(static_cast<int>(read_unsigned(value[i], key + "[" + std::to_string(i) + "]", 1, kMaxStages)));
  }
  return values;
}

std::vector<int> read_n_range(const json& value, const std::string& key) {
  if (!value.is_array() || value.size() != 2) fail(key, "expected [first, last]");
  const auto first = static_cast<int>(read_unsigned(value[0], key + "[0]", 1, kMaxStages));
  const auto last = static_cast<int>(read_unsigned(value[1], key + "[1]", 1, kMaxStages));
  if (last < first) fail(key, "last must be >= first");
  std::vector<int> values;
  for (int n = first; n <= last; ++n) values.push_back(n);
  return values;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::baseline:
      return "baseline";
    case ExperimentKind::efficiency_scan:
      return "efficiency_scan";
    case ExperimentKind::attack_demo:
      return "attack_demo";
    case ExperimentKind::birefringence_sweep:
      return "birefringence_sweep";
    case ExperimentKind::truth_table:
      return "truth_table";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const ExperimentKind kind : {ExperimentKind::baseline, ExperimentKind::efficiency_scan,
                                    ExperimentKind::attack_demo, ExperimentKind::birefringence_sweep,
                                    ExperimentKind::truth_table}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected baseline, efficiency_scan, attack_demo, birefringence_sweep or truth_table)");
}

std::vector<SessionConfig> ExperimentSpec::expand() const {
  std::vector<SessionConfig> configs;
  switch (kind) {
    case ExperimentKind::baseline:
    case ExperimentKind::truth_table:
      configs.push_back(config);
      break;
    case ExperimentKind::efficiency_scan:
      for (const int n : n_values) {
        SessionConfig scan = config;
        scan.n_stages = n;
        configs.push_back(scan);
      }
      break;
    case ExperimentKind::attack_demo: {
      SessionConfig off = config;
      off.eve = EveKind::intercept_resend_reference;
      off.sample_prob = 0.0;
      off.decoy_prob = 0.0;
      SessionConfig on = config;
      on.eve = EveKind::intercept_resend_reference;
      if (on.sample_prob == 0.0) on.sample_prob = 0.2;
      configs.push_back(off);
      configs.push_back(on);
      break;
    }
    case ExperimentKind::birefringence_sweep:
      for (const BirefringenceMode mode : {BirefringenceMode::none, BirefringenceMode::fixed_unitary,
                                           BirefringenceMode::random_per_train}) {
        SessionConfig sweep = config;
        sweep.channel.birefringence_mode = mode;
        configs.push_back(sweep);
      }
      break;
  }
  return configs;
}

std::vector<ExperimentSpec> parse_config_text(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("malformed config: top level must be an object");
  }

  SessionConfig defaults;
  for (const auto& [name, value] : root.items()) {
    if (name != "seed" && name != "defaults" && name != "experiments") fail(name, "unknown key");
  }
  if (root.contains("seed")) {
    defaults.seed = read_unsigned(root["seed"], "seed", 0, kMaxU64);
  }
  if (root.contains("defaults")) {
    const json& section = root["defaults"];
    if (!section.is_object()) fail("defaults", "expected an object");
    for (const auto& [name, value] : section.items()) {
      if (!apply_session_key(name, value, defaults, "defaults")) fail("defaults." + name, "unknown key");
    }
  }
  if (!root.contains("experiments")) {
    throw ConfigError("config key 'experiments': missing (list at least one experiment)");
  }
  const json& list = root["experiments"];
  if (!list.is_array() || list.empty()) fail("experiments", "expected a non-empty array");

  std::vector<ExperimentSpec> specs;
  std::map<std::string, int> stem_uses;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string prefix = "experiments[" + std::to_string(i) + "]";
    const json& item = list[i];
    ExperimentSpec spec;
    spec.config = defaults;
    std::optional<std::string> output;

    if (item.is_string()) {
      try {
        spec.kind = parse_experiment_kind(item.get<std::string>());
      } catch (const ConfigError& e) {
        fail(prefix, e.what());
      }
    } else if (item.is_object()) {
      if (!item.contains("name")) fail(prefix + ".name", "missing");
      try {
        spec.kind = parse_experiment_kind(read_string(item["name"], prefix + ".name"));
      } catch (const ConfigError& e) {
        fail(prefix + ".name", e.what());
      }
      for (const auto& [name, value] : item.items()) {
        const std::string key = prefix + "." + name;
        if (name == "name") continue;
        if (name == "output") {
          output = read_string(value, key);
          if (output->empty() || output->find_first_of("/\\") != std::string::npos) {
            fail(key, "must be a plain file stem");
          }
        } else if (name == "n_values" && spec.kind == ExperimentKind::efficiency_scan) {
          spec.n_values = read_n_values(value, key);
        } else if (name == "n_range" && spec.kind == ExperimentKind::efficiency_scan) {
          spec.n_values = read_n_range(value, key);
        } else if (!apply_session_key(name, value, spec.config, prefix)) {
          fail(key, "unknown key");
        }
      }
    } else {
      fail(prefix, "expected an experiment name or object");
    }

    if (spec.kind == ExperimentKind::efficiency_scan && spec.n_values.empty()) {
      spec.n_values = {1, 2, 3, 4, 5, 6};
    }
    try {
      spec.config.validate();
    } catch (const std::invalid_argument& e) {
      fail(prefix, e.what());
    }

    const std::string stem = output.value_or(to_string(spec.kind));
    const int uses = ++stem_uses[stem];
    spec.output_stem = uses == 1 ? stem : stem + "_" + std::to_string(uses);
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<ExperimentSpec> parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace dpsqkd
