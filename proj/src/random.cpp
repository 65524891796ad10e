#include "modcs/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modcs {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveKey(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ SplitMix64(a + 0x1234567ULL));
  h = SplitMix64(h ^ SplitMix64(b + 0x89ABCDEULL));
  h = SplitMix64(h ^ SplitMix64(c + 0xF0F0F0FULL));
  return h;
}

CounterRng::result_type CounterRng::operator()() {
  const std::uint64_t k = counter_++;
  return SplitMix64(key_ ^ SplitMix64(k));
}

double CounterRng::Uniform01() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::Below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("CounterRng::Below: empty range");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t v;
  do {
    v = (*this)();
  } while (v >= limit);
  return v % bound;
}

double CounterRng::StandardNormal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * Uniform01() - 1.0;
    v = 2.0 * Uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::vector<int> SampleWithoutReplacement(const std::vector<int>& pool, int count,
                                          CounterRng& rng) {
  if (count < 0 || count > static_cast<int>(pool.size())) {
    throw std::invalid_argument("SampleWithoutReplacement: count exceeds pool size");
  }
  std::vector<int> work = pool;
  for (int i = 0; i < count; ++i) {
    const auto j = i + static_cast<int>(rng.Below(work.size() - i));
    std::swap(work[i], work[j]);
  }
  work.resize(count);
  std::sort(work.begin(), work.end());
  return work;
}

}  // namespace modcs
