#ifndef ABCLAB_TORUS_MAP_HPP
#define ABCLAB_TORUS_MAP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

namespace abclab {

template <class Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <class Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;

template <class Scalar>
constexpr Scalar two_pi() {
  return static_cast<Scalar>(6.283185307179586476925286766559005768L);
}
template <class Scalar>
constexpr Scalar pi() {
  return static_cast<Scalar>(3.141592653589793238462643383279502884L);
}

/// Canonical representative in [0, 2*pi).
template <class Scalar>
inline Scalar wrap_angle(Scalar a) {
  Scalar w = std::fmod(a, two_pi<Scalar>());
  if (w < Scalar(0)) w += two_pi<Scalar>();
  if (w >= two_pi<Scalar>()) w -= two_pi<Scalar>();
  return w;
}

/// Signed representative in (-pi, pi]; ties at pi resolve to +pi.
template <class Scalar>
inline Scalar wrap_signed(Scalar a) {
  Scalar w = std::fmod(a, two_pi<Scalar>());
  if (w <= -pi<Scalar>()) w += two_pi<Scalar>();
  if (w > pi<Scalar>()) w -= two_pi<Scalar>();
  return w;
}

template <class Scalar>
inline Vec3T<Scalar> wrap_point(const Vec3T<Scalar>& p) {
  return {wrap_angle(p.x()), wrap_angle(p.y()), wrap_angle(p.z())};
}

/// Per-coordinate circle distance, always <= pi.
template <class Scalar>
inline Scalar torus_coord_distance(Scalar a, Scalar b) {
  return std::abs(wrap_signed(a - b));
}

/// Euclidean norm of the three per-coordinate circle distances.
template <class Scalar>
inline Scalar torus_distance(const Vec3T<Scalar>& p, const Vec3T<Scalar>& q) {
  const Vec3T<Scalar> d(wrap_signed(p.x() - q.x()), wrap_signed(p.y() - q.y()),
                        wrap_signed(p.z() - q.z()));
  return d.norm();
}

/// Shortest wrapped displacement from `from` to `to`, componentwise in (-pi, pi].
template <class Scalar>
inline Vec3T<Scalar> torus_displacement(const Vec3T<Scalar>& from, const Vec3T<Scalar>& to) {
  return {wrap_signed(to.x() - from.x()), wrap_signed(to.y() - from.y()),
          wrap_signed(to.z() - from.z())};
}

/// One iteration's noise parameters: amplitudes in [-U, U], phases in [0, 2*pi).
struct NoiseSample {
  double amp_a = 0.0;
  double amp_b = 0.0;
  double amp_c = 0.0;
  double phase_a = 0.0;
  double phase_b = 0.0;
  double phase_c = 0.0;
};

enum class ShearAxis { A, B, C };

/// A-axis: (x,y,z) -> (x + a sin(z+phase), y + a cos(z+phase), z), wrapped.
/// B-axis: (x,y,z) -> (x, y + a sin(x+phase), z + a cos(x+phase)).
/// C-axis: (x,y,z) -> (x + a cos(y+phase), y, z + a sin(y+phase)).
template <class Scalar>
inline Vec3T<Scalar> shear(ShearAxis axis, const Vec3T<Scalar>& p, Scalar amp, Scalar phase) {
  Vec3T<Scalar> q = p;
  switch (axis) {
    case ShearAxis::A:
      q.x() = wrap_angle(p.x() + amp * std::sin(p.z() + phase));
      q.y() = wrap_angle(p.y() + amp * std::cos(p.z() + phase));
      break;
    case ShearAxis::B:
      q.y() = wrap_angle(p.y() + amp * std::sin(p.x() + phase));
      q.z() = wrap_angle(p.z() + amp * std::cos(p.x() + phase));
      break;
    case ShearAxis::C:
      q.x() = wrap_angle(p.x() + amp * std::cos(p.y() + phase));
      q.z() = wrap_angle(p.z() + amp * std::sin(p.y() + phase));
      break;
  }
  return q;
}

/// One full iteration: C-shear after B-shear after A-shear.
template <class Scalar = double>
inline Vec3T<Scalar> step(const Vec3T<Scalar>& p, const NoiseSample& w) {
  Vec3T<Scalar> q = shear(ShearAxis::A, p, Scalar(w.amp_a), Scalar(w.phase_a));
  q = shear(ShearAxis::B, q, Scalar(w.amp_b), Scalar(w.phase_b));
  q = shear(ShearAxis::C, q, Scalar(w.amp_c), Scalar(w.phase_c));
  return q;
}

/// Exact inverse of step: negated amplitudes applied in reversed shear order.
template <class Scalar = double>
inline Vec3T<Scalar> inverse_step(const Vec3T<Scalar>& p, const NoiseSample& w) {
  Vec3T<Scalar> q = shear(ShearAxis::C, p, Scalar(-w.amp_c), Scalar(w.phase_c));
  q = shear(ShearAxis::B, q, Scalar(-w.amp_b), Scalar(w.phase_b));
  q = shear(ShearAxis::A, q, Scalar(-w.amp_a), Scalar(w.phase_a));
  return q;
}

/// Shear-composed angles of one iteration at p.  Z feeds the A-shear, X the
/// B-shear (evaluated after A has moved the point), Y the C-shear, and
/// phi_aux = B cos X cos Z - sin Z is the recurring factor of the one-step
/// Jacobian.
template <class Scalar>
struct JacobianAux {
  Scalar Z, X, Y, phi_aux;
};

template <class Scalar = double>
inline JacobianAux<Scalar> jacobian_aux(const Vec3T<Scalar>& p, const NoiseSample& w) {
  const Scalar A = Scalar(w.amp_a), B = Scalar(w.amp_b);
  JacobianAux<Scalar> aux;
  aux.Z = Scalar(w.phase_a) + p.z();
  aux.X = Scalar(w.phase_b) + p.x() + A * std::sin(aux.Z);
  aux.Y = Scalar(w.phase_c) + p.y() + A * std::cos(aux.Z) + B * std::sin(aux.X);
  aux.phi_aux = B * std::cos(aux.X) * std::cos(aux.Z) - std::sin(aux.Z);
  return aux;
}

/// Analytic one-step Jacobian D_p f_w; unit determinant by construction.
template <class Scalar = double>
inline Mat3T<Scalar> jacobian_step(const Vec3T<Scalar>& p, const NoiseSample& w) {
  const Scalar A = Scalar(w.amp_a), B = Scalar(w.amp_b), C = Scalar(w.amp_c);
  const JacobianAux<Scalar> aux = jacobian_aux<Scalar>(p, w);
  const Scalar cZ = std::cos(aux.Z);
  const Scalar sX = std::sin(aux.X), cX = std::cos(aux.X);
  const Scalar sY = std::sin(aux.Y), cY = std::cos(aux.Y);
  const Scalar phi = aux.phi_aux;
  Mat3T<Scalar> j;
  j << Scalar(1) - B * C * cX * sY, -C * sY, -A * (C * phi * sY - cZ),
       B * cX, Scalar(1), A * phi,
       B * (C * cX * cY - sX), C * cY, Scalar(1) + A * (C * phi * cY - B * cZ * sX);
  return j;
}

/// (D_p f_w)^-1, assembled by the chain rule on the reversed shears rather
/// than by inverting the forward matrix.  Each per-shear factor depends only
/// on the coordinate that shear leaves fixed, so the intermediate points of
/// the forward pass supply all three factors.
template <class Scalar = double>
inline Mat3T<Scalar> jacobian_inverse_step(const Vec3T<Scalar>& p, const NoiseSample& w) {
  const Scalar A = Scalar(w.amp_a), B = Scalar(w.amp_b), C = Scalar(w.amp_c);
  const JacobianAux<Scalar> aux = jacobian_aux<Scalar>(p, w);
  const Scalar sZ = std::sin(aux.Z), cZ = std::cos(aux.Z);
  const Scalar sX = std::sin(aux.X), cX = std::cos(aux.X);
  const Scalar sY = std::sin(aux.Y), cY = std::cos(aux.Y);
  Mat3T<Scalar> ja_inv, jb_inv, jc_inv;
  ja_inv << Scalar(1), Scalar(0), -A * cZ,
            Scalar(0), Scalar(1), A * sZ,
            Scalar(0), Scalar(0), Scalar(1);
  jb_inv << Scalar(1), Scalar(0), Scalar(0),
            -B * cX, Scalar(1), Scalar(0),
            B * sX, Scalar(0), Scalar(1);
  jc_inv << Scalar(1), C * sY, Scalar(0),
            Scalar(0), Scalar(1), Scalar(0),
            Scalar(0), -C * cY, Scalar(1);
  return ja_inv * jb_inv * jc_inv;
}

/// Iterates the composed map along `path`, left-multiplying the per-step
/// Jacobians evaluated along the trajectory.  No renormalization: at U = pi
/// the double-precision product overflows near n ~ 850 (growth ~ e^{0.8 n});
/// instantiate with long double for longer horizons, or use the lyapunov
/// module, which renormalizes.
template <class Scalar = double>
inline std::pair<Vec3T<Scalar>, Mat3T<Scalar>> iterate_with_cocycle(
    Vec3T<Scalar> p, std::span<const NoiseSample> path) {
  Mat3T<Scalar> cocycle = Mat3T<Scalar>::Identity();
  for (const NoiseSample& w : path) {
    cocycle = (jacobian_step<Scalar>(p, w) * cocycle).eval();
    p = step<Scalar>(p, w);
  }
  return {p, cocycle};
}

}  // namespace abclab

#endif
