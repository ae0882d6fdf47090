// Test-only oracles, independent of the implementation paths they check.
#ifndef ABCLAB_TESTS_ORACLE_HELPERS_HPP
#define ABCLAB_TESTS_ORACLE_HELPERS_HPP

#include "abclab/noise.hpp"
#include "abclab/torus_map.hpp"

namespace abclab::test {

/// Central-difference spatial Jacobian of the composed one-step map,
/// wrap-aware in both the perturbation and the image difference.
inline Mat3 fd_step_jacobian(const Vec3& p, const NoiseSample& w, double h = 1e-6) {
  Mat3 j;
  for (int c = 0; c < 3; ++c) {
    Vec3 plus = p, minus = p;
    plus[c] += h;
    minus[c] -= h;
    const Vec3 fp = step<double>(plus, w);
    const Vec3 fm = step<double>(minus, w);
    for (int r = 0; r < 3; ++r) j(r, c) = wrap_signed(fp[r] - fm[r]) / (2.0 * h);
  }
  return j;
}

/// Exact 3x3 inverse through the adjugate; for unit-determinant input this is
/// the inverse itself.
inline Mat3 adjugate_inverse(const Mat3& m) {
  Mat3 adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return adj / m.determinant();
}

/// Deterministic test-local generators (kept off the library's stream domains).
inline Vec3 random_point(std::uint64_t index, std::uint64_t tag = 900) {
  CounterRng rng(0xABCDEF, (tag << 32), index);
  return {rng.next_angle(), rng.next_angle(), rng.next_angle()};
}

inline NoiseSample random_sample(std::uint64_t index, double u_max,
                                 std::uint64_t tag = 901) {
  CounterRng rng(0xABCDEF, (tag << 32), index);
  NoiseSample w;
  w.amp_a = rng.next_symmetric(u_max);
  w.amp_b = rng.next_symmetric(u_max);
  w.amp_c = rng.next_symmetric(u_max);
  w.phase_a = rng.next_angle();
  w.phase_b = rng.next_angle();
  w.phase_c = rng.next_angle();
  return w;
}

inline Vec3 random_unit(std::uint64_t index, std::uint64_t tag = 902) {
  CounterRng rng(0xABCDEF, (tag << 32), index);
  double g0, g1, g2, g3;
  rng.next_gaussian_pair(g0, g1);
  rng.next_gaussian_pair(g2, g3);
  Vec3 v(g0, g1, g2);
  return v / v.norm();
}

}  // namespace abclab::test

#endif
