#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace sbpg {

// Deterministic random source used everywhere results must be reproducible.
//
// Core generator: splitmix64 (Steele/Lea/Flood). The standard library's
// distributions are implementation-defined, so normals are produced with
// Box-Muller on explicit 53-bit uniforms. Two draws per normal, no cached
// spare: the stream position is a pure function of the call sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream derived from (seed, stream). Used to give instance
  // generation, initialization, and the optimizer separate streams.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Uniform index in [0, n) via the 128-bit multiply reduction.
  // Bias is below 2^-53 for any n this library uses.
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  void fill_normal(std::span<double> out) {
    for (double& x : out) x = normal();
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Streams used when a single trial seed has to feed several consumers.
inline constexpr std::uint64_t kStreamInstance = 1;
inline constexpr std::uint64_t kStreamInit = 2;
inline constexpr std::uint64_t kStreamRun = 3;
inline constexpr std::uint64_t kStreamData = 4;

// Point drawn uniformly from the ball of the given radius: uniform direction
// (normalized Gaussians) times radius * U^(1/d).
inline std::vector<double> ball_point(std::size_t d, double radius, Rng& rng) {
  std::vector<double> x(d);
  double sq = 0.0;
  for (double& v : x) {
    v = rng.normal();
    sq += v * v;
  }
  const double nrm = std::sqrt(sq);
  const double r = radius * std::pow(rng.uniform_pos(), 1.0 / static_cast<double>(d));
  const double scale = nrm > 0.0 ? r / nrm : 0.0;
  for (double& v : x) v *= scale;
  return x;
}

}  // namespace sbpg
