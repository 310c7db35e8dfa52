#ifndef BANGBANG_RNG_HPP
#define BANGBANG_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace bangbang {

// Name recorded in instance files next to the seed.
inline constexpr std::string_view kRngName = "mt19937_64+box-muller";

std::uint64_t splitmix64(std::uint64_t x);

// Per-job seed derivation: splitmix64 applied to the master seed and the
// job index. Independent of execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Seeded stream of uniform and standard-normal variates.
//
// Uniforms take the top 53 bits of mt19937_64. Normals use the basic
// Box-Muller transform, emitting both variates of each pair, so the stream
// is identical across standard libraries (std::normal_distribution is not).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  double normal();

  std::mt19937_64 &engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace bangbang

#endif // BANGBANG_RNG_HPP
