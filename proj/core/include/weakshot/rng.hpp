#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace weakshot {

/// Deterministic xoshiro256++ generator. All randomness in the project goes
/// through this type so results are bit-reproducible across platforms;
/// the standard <random> distributions are implementation-defined and are
/// deliberately not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  /// Unbiased integer in [0, n); n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via Box-Muller (caches the spare draw).
  double normal();
  double normal(double mean, double stddev);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  /// k distinct indices drawn uniformly from [0, n), in random order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Derives the seed of a named substream from a master seed. Each module of
/// a run draws from its own substream so toggling one stage never perturbs
/// the randomness of another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name);

}  // namespace weakshot
