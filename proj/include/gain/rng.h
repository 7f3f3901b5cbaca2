#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gain {

// Seeded random source owned by the caller and passed into every stochastic
// operation. Independent streams are derived with Fork(), so a document's
// randomness depends only on (seed, stream ids) and not on call order
// elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(MakeSeq(seed, {})) {}

  std::uint64_t seed() const { return seed_; }

  // Deterministic child stream keyed by `stream`.
  Rng Fork(std::uint64_t stream) const { return Rng(seed_, stream); }
  Rng Fork(std::uint64_t a, std::uint64_t b) const { return Fork(Mix(a, b)); }

  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Returns true with probability p.
  bool Bernoulli(double p) { return Uniform(0.0, 1.0) < p; }
  // Uniform integer in [0, n).
  std::size_t Index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : seed_(Mix(seed, stream)), engine_(MakeSeq(seed, {stream})) {}

  static std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::mt19937_64 MakeSeq(std::uint64_t seed, std::initializer_list<std::uint64_t> extra) {
    std::vector<std::uint32_t> words = {static_cast<std::uint32_t>(seed),
                                        static_cast<std::uint32_t>(seed >> 32)};
    for (std::uint64_t e : extra) {
      words.push_back(static_cast<std::uint32_t>(e));
      words.push_back(static_cast<std::uint32_t>(e >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace gain
