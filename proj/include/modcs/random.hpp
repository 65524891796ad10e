#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace modcs {

// Purpose tags keep the random streams of different consumers independent.
enum class StreamTag : std::uint64_t {
  kMatrix = 1,
  kInitialMatrix = 2,
  kInitialSupport = 3,
  kInitialSigns = 4,
  kInitialCohorts = 5,
  kAdditions = 6,
  kDecreases = 7,
  kSigns = 8,
  kCohortShuffle = 9,
  kNoise = 10,
  kTrial = 11,
  kSampling = 12,
};

std::uint64_t SplitMix64(std::uint64_t x);

// Combines a seed with stream coordinates into a single 64-bit key.
std::uint64_t DeriveKey(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0);

// Counter-based generator: the k-th output is a pure function of (key, k),
// so a stream keyed by (seed, t, tag) is reproducible regardless of how many
// other streams were consumed before it. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::uint64_t t, StreamTag tag)
      : key_(DeriveKey(seed, t, static_cast<std::uint64_t>(tag))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform01();
  // Uniform integer in [0, bound).
  std::uint64_t Below(std::uint64_t bound);
  double StandardNormal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Uniformly random subset of `count` elements of `pool` (partial Fisher-Yates).
// Result is sorted ascending.
std::vector<int> SampleWithoutReplacement(const std::vector<int>& pool, int count,
                                          CounterRng& rng);

}  // namespace modcs
