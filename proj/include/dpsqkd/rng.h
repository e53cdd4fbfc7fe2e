#pragma once

#include <cstdint>
#include <random>

namespace dpsqkd {

// Independent sub-streams of one round. Each lane owns its own engine so that
// turning a feature on (birefringence, decoys, ...) does not shift the draws
// consumed elsewhere in the round.
enum class RngLane : std::uint64_t {
  kChoices = 0,
  kChannel = 1,
  kAliceCheck = 2,
  kDecoy = 3,
  kBobDetect = 4,
  kEve = 5,
  kDisclosure = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t round, RngLane lane) {
    const std::uint64_t key =
        splitmix64(splitmix64(master_seed) ^ splitmix64(round + 0x632BE59BD9B4E019ULL)) ^
        static_cast<std::uint64_t>(lane);
    return Rng(key);
  }

  // Uniform in [0, 1) from the top 53 bits; identical on every platform.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dpsqkd
