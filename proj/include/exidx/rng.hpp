#pragma once

#include <cmath>
#include <cstdint>

namespace exidx {

// One step of the splitmix64 sequence; used to whiten seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Collapses (master seed, stream index) into a single stream seed. Streams
// with distinct indices are decorrelated, so replicate r of a study can draw
// from derive_seed(master, r) no matter which thread runs it.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  std::uint64_t s = master;
  (void)splitmix64_next(s);
  s ^= 0xD1B54A32D192ED03ull * (stream + 1);
  return splitmix64_next(s);
}

// xoshiro256** (Blackman/Vigna) seeded through splitmix64. All samplers draw
// uniforms straight from the engine output, so sequences are identical on any
// platform for a given (seed, stream) pair.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed, 0); }
  Rng(std::uint64_t master_seed, std::uint64_t stream) { reseed(master_seed, stream); }

  void reseed(std::uint64_t master_seed, std::uint64_t stream) noexcept {
    std::uint64_t s = derive_seed(master_seed, stream);
    for (auto& word : state_) word = splitmix64_next(s);
    have_spare_normal_ = false;
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never 0 or 1, so logs are safe.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() noexcept {
    if (have_spare_normal_) {
      have_spare_normal_ = false;
      return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi * u2;
    spare_normal_ = radius * std::sin(angle);
    have_spare_normal_ = true;
    return radius * std::cos(angle);
  }

  double cauchy() noexcept { return std::tan(pi * (uniform() - 0.5)); }
  double exponential() noexcept { return -std::log(uniform()); }
  double unit_frechet() noexcept { return -1.0 / std::log(uniform()); }
  double gumbel() noexcept { return -std::log(-std::log(uniform())); }

 private:
  static constexpr double pi = 3.14159265358979323846;
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
  double spare_normal_ = 0.0;
  bool have_spare_normal_ = false;
};

}  // namespace exidx
