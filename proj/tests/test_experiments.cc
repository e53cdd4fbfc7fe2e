#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpsqkd/experiments.h"

using namespace dpsqkd;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string error_of(std::string_view text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config uses defaults") {
  const auto specs = parse_config_text(R"({"experiments": ["baseline"]})");
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].kind == ExperimentKind::baseline);
  CHECK(specs[0].output_stem == "baseline");
  CHECK(specs[0].config == SessionConfig{});
}

TEST_CASE("defaults and per-experiment overrides") {
  const auto specs = parse_config_text(R"({
    "seed": 5,
    "defaults": {"rounds": 100, "mean_photons": 0.2, "channel": {"loss_db": 1.5, "birefringence": "fixed_unitary"}},
    "experiments": [
      {"name": "baseline", "rounds": 50, "detector": {"quantum_efficiency": 0.5}},
      {"name": "baseline", "output": "second"},
      "baseline"
    ]
  })");
  REQUIRE(specs.size() == 3);
  CHECK(specs[0].config.seed == 5);
  CHECK(specs[0].config.rounds == 50);
  CHECK(specs[0].config.detector.quantum_efficiency == 0.5);
  CHECK(specs[0].config.mean_photons_return == 0.2);
  CHECK(specs[0].config.channel.birefringence_mode == BirefringenceMode::fixed_unitary);
  CHECK(specs[1].config.rounds == 100);
  CHECK(specs[1].output_stem == "second");
  CHECK(specs[2].output_stem == "baseline_2");
}

TEST_CASE("config errors name the offending key") {
  const std::string range = error_of(R"({"experiments": [{"name": "baseline", "sample_prob": 1.5}]})");
  CHECK(range.find("sample_prob") != std::string::npos);
  CHECK(range.find("out of range") != std::string::npos);

  CHECK(error_of(R"({"experiments": ["nope"]})").find("unknown experiment") != std::string::npos);
  CHECK(error_of(R"({"experiments": [{"name": "baseline", "bogus": 1}]})").find("bogus") != std::string::npos);
  CHECK(error_of(R"({"defaults": {"n_stages": 0}, "experiments": ["baseline"]})").find("n_stages") !=
        std::string::npos);
  CHECK(error_of(R"({"experiments": []})").find("experiments") != std::string::npos);
  CHECK(error_of(R"({})").find("missing") != std::string::npos);

  const std::string malformed = error_of("{\"experiments\": [");
  const std::string missing = [] {
    try {
      parse_config("/nonexistent/dir/config.json");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  }();
  CHECK(malformed.find("malformed") != std::string::npos);
  CHECK(missing.find("cannot open") != std::string::npos);
  CHECK(malformed != missing);
}

TEST_CASE("experiment expansion") {
  const auto specs = parse_config_text(R"({"experiments": [
    {"name": "efficiency_scan", "n_range": [1, 6]},
    {"name": "efficiency_scan", "n_values": [2, 4]},
    "attack_demo",
    "birefringence_sweep"
  ]})");
  const auto scan = specs[0].expand();
  REQUIRE(scan.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(scan[i].n_stages == i + 1);
  CHECK(specs[1].expand().size() == 2);

  const auto attack = specs[2].expand();
  REQUIRE(attack.size() == 2);
  CHECK(attack[0].sample_prob == 0.0);
  CHECK(attack[1].sample_prob == SessionConfig{}.sample_prob);
  CHECK(attack[1].eve == EveKind::intercept_resend_reference);

  CHECK(specs[3].expand().size() == 3);
}

TEST_CASE("csv formatting") {
  ResultTable empty{"empty", {"a", "b"}, {}};
  CHECK(to_csv(empty) == "a,b\n");

  ResultTable table{"t", {"i", "x", "s", "missing"}, {{std::int64_t{3}, 0.1234567, std::string("a,b"), std::monostate{}},
                                                      {std::int64_t{-1}, -0.0, std::string("plain"), 2.0}}};
  CHECK(to_csv(table) == "i,x,s,missing\n3,0.123457,\"a,b\",\n-1,0,plain,2\n");

  const std::string json = to_structured(table);
  CHECK(json.find("\"experiment\": \"t\"") != std::string::npos);
  CHECK(json.find("0.123457") != std::string::npos);
  CHECK(json.find("null") != std::string::npos);
}

TEST_CASE("baseline run produces one row and is reproducible") {
  auto specs = parse_config_text(R"({"seed": 3, "experiments": [{"name": "baseline", "rounds": 2000}]})");
  const ResultTable first = run_experiment(specs[0]);
  REQUIRE(first.rows.size() == 1);
  CHECK(first.rows[0].size() == first.columns.size());
  CHECK(to_csv(run_experiment(specs[0])) == to_csv(first));

  const auto dir = std::filesystem::temp_directory_path() / "dpsqkd_test_emit";
  std::filesystem::create_directories(dir);
  emit(first, OutputFormat::csv, dir / "a.csv");
  emit(run_experiment(specs[0]), OutputFormat::csv, dir / "b.csv");
  CHECK(read_file(dir / "a.csv") == read_file(dir / "b.csv"));
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(emit(first, OutputFormat::csv, "/nonexistent/dir/out.csv"), std::runtime_error);
}

TEST_CASE("truth table recovers the bit for every phase pair") {
  const auto specs = parse_config_text(R"({"experiments": ["truth_table"]})");
  const ResultTable table = run_experiment(specs[0]);
  REQUIRE(table.rows.size() == 8);
  CHECK(table.columns.size() == 2 + 2 * 2 * 9 + 1);
  CHECK(std::get<std::string>(table.rows[0][0]) == "0");
  CHECK(std::get<std::string>(table.rows[0][1]) == "0");
  // phi_A = phi_B = 0: slot 1 at D1 reads 1, slot 2 reads 2.
  CHECK(std::get<double>(table.rows[0][2]) == doctest::Approx(1.0));
  CHECK(std::get<double>(table.rows[0][4]) == doctest::Approx(2.0));
  for (const auto& row : table.rows) CHECK(std::get<std::int64_t>(row.back()) == 1);
}

TEST_CASE("output format names") {
  CHECK(parse_output_format("csv") == OutputFormat::csv);
  CHECK(file_extension(parse_output_format("structured")) == ".json");
  CHECK_THROWS_AS(parse_output_format("xml"), ConfigError);
}
