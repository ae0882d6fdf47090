#ifndef ABCLAB_CONTROL_HPP
#define ABCLAB_CONTROL_HPP

#include "abclab/noise.hpp"
#include "abclab/torus_map.hpp"

#include <stdexcept>
#include <vector>

namespace abclab {

struct PlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A finite parameter sequence steering the chain to a declared target.
/// Achieved errors are always recomputed by replaying the plan through the
/// composed maps, never trusted from the construction.
struct ControlPlan {
  std::vector<NoiseSample> samples;
  double position_error = 0.0;         // torus distance at the (first) endpoint
  double position_error_second = 0.0;  // second endpoint (two-point plans)
  double direction_error = 0.0;        // angle to the target direction, up to sign
};

Vec3 replay_position(const ControlPlan& plan, const Vec3& x0);
std::pair<Vec3, Vec3> replay_projective(const ControlPlan& plan, const Vec3& x0, const Vec3& v0);

/// Angle between directions identified up to sign.
double direction_angle(const Vec3& a, const Vec3& b);

/// Exact one-point steering: per step, phases are chosen so each shear
/// translates one coordinate rigidly (cos = 1 slots), making the amplitudes
/// equal the wrapped displacements.  For u_max < pi the displacement splits
/// across ceil(pi / u_max) steps.
ControlPlan plan_one_point(const Vec3& x, const Vec3& x_star, double u_max);

/// Steers the direction component to +-e1.  Implements the one-step solve
/// through the inverse Jacobian column (v_z != 0 case and the two v_z = 0
/// special cases); when the solved amplitude would exceed u_max a preliminary
/// lever step first enlarges |v_z|.  Requires u_max >= pi.
ControlPlan plan_projective_align(const Vec3& x, const Vec3& v, double u_max = pi<double>());

/// Full projective steering (x, v) -> (x_star, v_star): align to e1, rigid
/// motion with B = 0 holding e1 fixed to the pulled-back waypoint, then the
/// reversed inverse-flow alignment built from the target pair.  Requires
/// u_max >= pi.  Positions land within 1e-8, directions within 1e-6 (angle,
/// up to sign), verified by replay.
ControlPlan plan_projective(const Vec3& x, const Vec3& v, const Vec3& x_star, const Vec3& v_star,
                            double u_max = pi<double>());

/// Forward pair contraction alone: brings (x1, x2) to equal x and y
/// coordinates with z-gap exactly epsilon (phase (i) of the two-point plan).
/// The achieved errors measure the replayed gap against (0, 0, epsilon).
ControlPlan plan_pair_contraction(const Vec3& x1, const Vec3& x2, double u_max,
                                  double epsilon);

/// Two-point steering: forward contraction to equal (x, y) coordinates and a
/// z-gap of epsilon, rigid pair translation with A = 0 (difference preserved
/// exactly), then the reversed inverse-flow contraction from the target pair.
/// Requires nondiagonal inputs, u_max > 1 and epsilon admissible.
ControlPlan plan_two_point(const Vec3& x1, const Vec3& x2, const Vec3& x1_star,
                           const Vec3& x2_star, double u_max, double epsilon);

}  // namespace abclab

#endif
