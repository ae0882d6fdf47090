#ifndef ABCLAB_NOISE_HPP
#define ABCLAB_NOISE_HPP

#include "abclab/torus_map.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace abclab {

/// Counter-based generator: the state is a hash of (seed, stream, index), so
/// any (stream, index) cell can be regenerated independently and in any
/// order.  Mixing is the splitmix64 finalizer.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
      : state_(mix(mix(mix(seed + kGamma) ^ stream) ^ index)) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [-bound, bound).
  double next_symmetric(double bound) { return bound * (2.0 * next_unit() - 1.0); }

  /// Uniform on [0, 2*pi).
  double next_angle() { return wrap_angle(two_pi<double>() * next_unit()); }

  /// Two independent standard normals (Box-Muller).
  void next_gaussian_pair(double& g0, double& g1) {
    const double u = 1.0 - next_unit();  // (0, 1]
    const double r = std::sqrt(-2.0 * std::log(u));
    const double t = two_pi<double>() * next_unit();
    g0 = r * std::cos(t);
    g1 = r * std::sin(t);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Stream-id layout: the top 32 bits name the consumer domain, the low 32
/// bits its sub-index.  Keeps every sampler in the toolkit on a disjoint,
/// scheduling-independent slice of the generator.
namespace streams {
constexpr std::uint64_t domain(std::uint64_t d, std::uint64_t sub = 0) {
  return (d << 32) | (sub & 0xFFFFFFFFULL);
}
constexpr std::uint64_t kMainPath = 0;       // user-facing noise paths
constexpr std::uint64_t kLyapunov = 1;       // ensemble trajectories
constexpr std::uint64_t kSpectrum = 2;
constexpr std::uint64_t kMcPoints = 3;       // Monte Carlo initial points
constexpr std::uint64_t kMcKicks = 4;        // diffusive kicks, sub = sample id
constexpr std::uint64_t kChain = 5;          // one-point chain diagnostics
}  // namespace streams

struct NoiseConfig {
  double u_max = pi<double>();
  std::uint64_t seed = 42;
};

struct NoisePath {
  std::vector<NoiseSample> samples;
  NoiseConfig config;
  std::uint64_t stream = 0;

  std::size_t size() const { return samples.size(); }
  const NoiseSample& operator[](std::size_t i) const { return samples[i]; }
};

inline void validate(const NoiseConfig& cfg) {
  if (!(cfg.u_max > 0.0)) throw std::invalid_argument("noise: u-max must be > 0");
}

/// The i-th sample of a stream: amplitudes uniform on [-U, U), phases uniform
/// on [0, 2*pi), all six independent and fully determined by (seed, stream, index).
inline NoiseSample sample_noise(const NoiseConfig& cfg, std::uint64_t stream,
                                std::uint64_t index) {
  validate(cfg);
  CounterRng rng(cfg.seed, stream, index);
  NoiseSample w;
  w.amp_a = rng.next_symmetric(cfg.u_max);
  w.amp_b = rng.next_symmetric(cfg.u_max);
  w.amp_c = rng.next_symmetric(cfg.u_max);
  w.phase_a = rng.next_angle();
  w.phase_b = rng.next_angle();
  w.phase_c = rng.next_angle();
  return w;
}

inline NoisePath noise_path(const NoiseConfig& cfg, std::uint64_t stream, std::size_t n) {
  validate(cfg);
  NoisePath path;
  path.config = cfg;
  path.stream = stream;
  path.samples.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) path.samples.push_back(sample_noise(cfg, stream, i));
  return path;
}

}  // namespace abclab

#endif
