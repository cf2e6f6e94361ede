#ifndef PCURL_RANDOM_HPP_
#define PCURL_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace pcurl {

// splitmix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

// Derives a seed for a named sub-stream of a top-level seed. Extra indices
// (step, prompt slot, ...) give further independent children.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::initializer_list<std::uint64_t> indices = {});

// Seeded generator. Draws are built from raw engine output only, so they do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // UniformRandomBitGenerator interface (for std::shuffle, gamma sampling).
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  bool operator==(const Rng& other) const = default;

 private:
  std::mt19937_64 engine_;
};

// Fisher-Yates shuffle driven by Rng::below, stable across standard libraries.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.below(i);
    std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1),
                   first + static_cast<std::ptrdiff_t>(j));
  }
}

}  // namespace pcurl

#endif  // PCURL_RANDOM_HPP_
