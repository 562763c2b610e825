#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace fairaes {

// Expands a parent seed into an independent named stream. Used for every
// per-stage, per-epoch and per-item PRNG so results never depend on call order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// mt19937_64 driven sampler. Distributions are written out by hand because
// the std:: distribution algorithms are implementation-defined, and corpora,
// splits and model weights must be identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller (no cached spare, one value per call).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairaes
