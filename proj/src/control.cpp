#include "abclab/control.hpp"

#include "abclab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace abclab {

namespace {

constexpr double kPi = pi<double>();

double sign_or_one(double x) { return x < 0.0 ? -1.0 : 1.0; }

/// Phase p with cos(anchor + p) = sign (+-1), hence sin(anchor + p) = 0.
double phase_for_cos(double anchor, double sign) {
  return wrap_angle((sign > 0.0 ? 0.0 : kPi) - anchor);
}

/// Phase p with sin(anchor + p) = sign (+-1), hence cos(anchor + p) = 0.
double phase_for_sin(double anchor, double sign) {
  return wrap_angle((sign > 0.0 ? kPi / 2.0 : -kPi / 2.0) - anchor);
}

NoiseSample make_sample(double a, double b, double c, double pa, double pb, double pc) {
  NoiseSample w;
  w.amp_a = a;
  w.amp_b = b;
  w.amp_c = c;
  w.phase_a = pa;
  w.phase_b = pb;
  w.phase_c = pc;
  return w;
}

void check_amplitudes(const std::vector<NoiseSample>& samples, double u_max) {
  for (const NoiseSample& w : samples) {
    const double worst =
        std::max({std::abs(w.amp_a), std::abs(w.amp_b), std::abs(w.amp_c)});
    if (worst > u_max * (1.0 + 1e-12))
      throw PlanError("control: constructed amplitude exceeds u-max");
  }
}

struct ProjState {
  Vec3 x;
  Vec3 v;
};

ProjState advance_forward(const ProjState& s, const NoiseSample& w) {
  const ProjectiveState next = projective_step(s.x, s.v, w);
  return {next.position, next.direction};
}

/// Inverse-flow projective step: x' = f^-1(x), v' ~ (D_{x'} f)^-1 v.
ProjState advance_inverse(const ProjState& s, const NoiseSample& w) {
  const Vec3 p = inverse_step<double>(s.x, w);
  const Vec3 image = jacobian_inverse_step<double>(p, w) * s.v;
  return {p, image / image.norm()};
}

}  // namespace

Vec3 replay_position(const ControlPlan& plan, const Vec3& x0) {
  Vec3 x = wrap_point<double>(x0);
  for (const NoiseSample& w : plan.samples) x = step<double>(x, w);
  return x;
}

std::pair<Vec3, Vec3> replay_projective(const ControlPlan& plan, const Vec3& x0,
                                        const Vec3& v0) {
  ProjState s{wrap_point<double>(x0), v0.normalized()};
  for (const NoiseSample& w : plan.samples) s = advance_forward(s, w);
  return {s.x, s.v};
}

double direction_angle(const Vec3& a, const Vec3& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c));
}

ControlPlan plan_one_point(const Vec3& x_in, const Vec3& x_star_in, double u_max) {
  if (!(u_max > 0.0)) throw PlanError("plan_one_point: u-max must be > 0");
  const Vec3 x = wrap_point<double>(x_in);
  const Vec3 x_star = wrap_point<double>(x_star_in);
  const Vec3 delta = torus_displacement<double>(x, x_star);
  const int splits = u_max >= kPi ? 1 : static_cast<int>(std::ceil(kPi / u_max));

  ControlPlan plan;
  Vec3 cur = x;
  for (int k = 0; k < splits; ++k) {
    const double a = delta.y() / splits;   // y-displacement rides the A-shear
    const double b = delta.z() / splits;   // z rides B
    const double c = delta.x() / splits;   // x rides C
    const NoiseSample w =
        make_sample(a, b, c, phase_for_cos(cur.z(), 1.0), phase_for_cos(cur.x(), 1.0),
                    phase_for_cos(cur.y() + a, 1.0));
    plan.samples.push_back(w);
    cur = step<double>(cur, w);
  }
  check_amplitudes(plan.samples, u_max);
  plan.position_error = torus_distance<double>(replay_position(plan, x), x_star);
  return plan;
}

namespace {

// -- projective alignment -----------------------------------------------

/// One lever step enlarging |v_z| using the larger of |v_x|, |v_y|.
NoiseSample forward_boost_sample(const ProjState& s, double u_max) {
  const double amp = std::min(u_max, kPi);
  const Vec3& v = s.v;
  if (std::abs(v.x()) >= std::abs(v.y())) {
    // B-shear: v_z' = v_z - B sin(X) v_x with cos slot zeroed
    const double sgn = -sign_or_one(v.z()) * sign_or_one(v.x());
    return make_sample(0.0, amp, 0.0, 0.0, phase_for_sin(s.x.x(), sgn), 0.0);
  }
  // C-shear: v_z' = v_z + C cos(Y) v_y
  const double sgn = sign_or_one(v.z()) * sign_or_one(v.y());
  return make_sample(0.0, 0.0, amp, 0.0, 0.0, phase_for_cos(s.x.y(), sgn));
}

/// Aligns the direction to +-e1 under the forward flow.  Returns the end state.
ProjState align_forward(std::vector<NoiseSample>& out, ProjState s, double u_max) {
  for (int guard = 0; guard < 8; ++guard) {
    if (direction_angle(s.v, Vec3::UnitX()) < 1e-12) return s;
    const Vec3& v = s.v;
    if (v.z() != 0.0) {
      const double a = (1.0 - v.x()) / v.z();
      const double b = std::hypot(v.y(), v.z());
      if (std::abs(a) <= u_max && b <= u_max) {
        // solve v = (D f)^-1 e1 exactly: image direction becomes +e1
        const NoiseSample w =
            make_sample(a, b, 0.0, phase_for_cos(s.x.z(), 1.0),
                        wrap_angle(std::atan2(v.z(), -v.y()) - s.x.x()), 0.0);
        out.push_back(w);
        return advance_forward(s, w);
      }
    } else if (v.x() != 0.0 && std::abs(v.y() / v.x()) <= u_max) {
      // v_z = 0: one B-shear with sin slot zeroed maps v onto the x-axis
      const NoiseSample w = make_sample(0.0, -v.y() / v.x(), 0.0,
                                        phase_for_cos(s.x.z(), 1.0),
                                        phase_for_cos(s.x.x(), 1.0), 0.0);
      out.push_back(w);
      return advance_forward(s, w);
    }
    const NoiseSample w = forward_boost_sample(s, u_max);
    out.push_back(w);
    s = advance_forward(s, w);
  }
  throw PlanError("plan_projective_align: alignment failed to converge");
}

/// Aligns the direction to +-e1 under the inverse flow (used to build the
/// final segment of projective plans backwards from the target).
ProjState align_inverse(std::vector<NoiseSample>& out, ProjState s, double u_max) {
  for (int guard = 0; guard < 8; ++guard) {
    if (direction_angle(s.v, Vec3::UnitX()) < 1e-12) return s;
    const Vec3& w = s.v;
    const double b = w.x() != 0.0 ? std::hypot(w.y(), w.z()) / std::abs(w.x()) : u_max + 1.0;
    if (w.x() != 0.0 && b <= u_max) {
      // (D f)^-1 applied to w kills the y and z components when
      // B cos X = w_y / w_x and B sin X = -w_z / w_x
      const double bx = std::atan2(-w.z() / w.x(), w.y() / w.x());
      const NoiseSample sample =
          make_sample(0.0, b, 0.0, 0.0, wrap_angle(bx - s.x.x()), 0.0);
      out.push_back(sample);
      return advance_inverse(s, sample);
    }
    // boost |w_x|
    const double amp = std::min(u_max, kPi);
    NoiseSample sample;
    if (std::abs(w.y()) >= std::abs(w.z())) {
      // C-lever: w_x' = w_x + C sin(Y) w_y
      const double sgn = sign_or_one(w.x()) * sign_or_one(w.y());
      sample = make_sample(0.0, 0.0, amp, 0.0, 0.0, phase_for_sin(s.x.y(), sgn));
    } else {
      // A-lever: w_x' = w_x - A cos(Z) w_z
      const double sgn = -sign_or_one(w.x()) * sign_or_one(w.z());
      sample = make_sample(amp, 0.0, 0.0, phase_for_cos(s.x.z(), sgn), 0.0, 0.0);
    }
    out.push_back(sample);
    s = advance_inverse(s, sample);
  }
  throw PlanError("plan_projective: inverse alignment failed to converge");
}

/// Rigid motion with B = 0: the direction +-e1 is exactly fixed while the
/// position travels to the target (y first via the A slot, then straight
/// (x, z) legs via the C slot).
ProjState rigid_motion(std::vector<NoiseSample>& out, ProjState s, const Vec3& target,
                       double u_max) {
  bool first = true;
  for (int guard = 0; guard < 64; ++guard) {
    const double dy = first ? wrap_signed(target.y() - s.x.y()) : 0.0;
    const double ybar = s.x.y() + dy;
    const Eigen::Vector2d d(wrap_signed(target.x() - s.x.x()),
                            wrap_signed(target.z() - s.x.z()));
    const double dist = d.norm();
    if (std::abs(dy) < 1e-13 && dist < 1e-13) return s;
    const int legs = std::max(1, static_cast<int>(std::ceil(dist / u_max)));
    const Eigen::Vector2d leg = d / legs;
    const double c = leg.norm();
    const double gamma = c > 0.0 ? wrap_angle(std::atan2(leg.y(), leg.x()) - ybar) : 0.0;
    const NoiseSample w =
        make_sample(dy, 0.0, c, phase_for_cos(s.x.z(), 1.0), 0.0, gamma);
    out.push_back(w);
    s = advance_forward(s, w);
    first = false;
  }
  throw PlanError("plan_projective: rigid motion failed to converge");
}

}  // namespace

ControlPlan plan_projective_align(const Vec3& x, const Vec3& v, double u_max) {
  if (u_max < kPi) throw PlanError("plan_projective_align: requires u-max >= pi");
  ControlPlan plan;
  ProjState s{wrap_point<double>(x), v.normalized()};
  const ProjState end = align_forward(plan.samples, s, u_max);
  check_amplitudes(plan.samples, u_max);
  const auto [xf, vf] = replay_projective(plan, x, v);
  plan.position_error = torus_distance<double>(xf, end.x);
  plan.direction_error = direction_angle(vf, Vec3::UnitX());
  return plan;
}

ControlPlan plan_projective(const Vec3& x, const Vec3& v, const Vec3& x_star,
                            const Vec3& v_star, double u_max) {
  if (u_max < kPi) throw PlanError("plan_projective: requires u-max >= pi");
  ControlPlan plan;
  if (torus_distance<double>(wrap_point<double>(x), wrap_point<double>(x_star)) < 1e-14 &&
      direction_angle(v, v_star) < 1e-14)
    return plan;  // already there
  ProjState s{wrap_point<double>(x), v.normalized()};
  const ProjState after_align = align_forward(plan.samples, s, u_max);

  std::vector<NoiseSample> inverse_segment;
  const ProjState backward_end = align_inverse(
      inverse_segment, {wrap_point<double>(x_star), v_star.normalized()}, u_max);

  rigid_motion(plan.samples, after_align, backward_end.x, u_max);
  plan.samples.insert(plan.samples.end(), inverse_segment.rbegin(), inverse_segment.rend());
  check_amplitudes(plan.samples, u_max);

  const auto [xf, vf] = replay_projective(plan, x, v);
  plan.position_error = torus_distance<double>(xf, x_star);
  plan.direction_error = direction_angle(vf, v_star);
  if (plan.position_error > 1e-8 || plan.direction_error > 1e-6) {
    std::ostringstream os;
    os << "plan_projective: replay outside tolerance (position " << plan.position_error
       << ", direction angle " << plan.direction_error << ")";
    throw PlanError(os.str());
  }
  return plan;
}

// -- two-point steering ---------------------------------------------------

namespace {

struct PairState {
  Vec3 p1, p2;
  Vec3 gap() const { return torus_displacement<double>(p2, p1); }  // p1 - p2 wrapped
};

class PairSteering {
 public:
  PairSteering(PairState state, double u_max, bool inverse)
      : state_(state), u_max_(u_max), inverse_(inverse) {}

  const PairState& state() const { return state_; }
  std::vector<NoiseSample>& emitted() { return emitted_; }

  void apply(const NoiseSample& w) {
    if (inverse_) {
      state_.p1 = inverse_step<double>(state_.p1, w);
      state_.p2 = inverse_step<double>(state_.p2, w);
    } else {
      state_.p1 = step<double>(state_.p1, w);
      state_.p2 = step<double>(state_.p2, w);
    }
    emitted_.push_back(w);
  }

  // Raw (representative) half gaps drive the amplitude solves; their
  // magnitudes agree with the wrapped ones.
  double half_sin_z() const { return std::sin((state_.p1.z() - state_.p2.z()) / 2.0); }
  double half_sin_y() const { return std::sin((state_.p1.y() - state_.p2.y()) / 2.0); }
  double half_sin_x() const { return std::sin((state_.p1.x() - state_.p2.x()) / 2.0); }

  /// A-shear leg changing the pair x-gap (cos slot) or y-gap (sin slot) by
  /// up to `want`; returns the increment actually applied.
  double a_leg(double want, bool x_slot) {
    const double lever = half_sin_z();
    if (std::abs(lever) < 1e-300) throw PlanError("plan_two_point: vanished z lever");
    const double mid = (state_.p1.z() + state_.p2.z()) / 2.0;
    // x-gap += 2 A cos(mid+alpha) sin(dz/2); y-gap += -2 A sin(mid+alpha) sin(dz/2)
    double amp = x_slot ? want / (2.0 * lever) : -want / (2.0 * lever);
    double applied = want;
    if (std::abs(amp) > u_max_) {
      applied = want * (u_max_ / std::abs(amp));
      amp = amp > 0 ? u_max_ : -u_max_;
    }
    const double phase = x_slot ? phase_for_cos(mid, 1.0) : phase_for_sin(mid, 1.0);
    apply(make_sample(effective(amp), 0.0, 0.0, phase, 0.0, 0.0));
    return applied;
  }

  /// C-shear leg changing the pair z-gap via the y lever (cos slot keeps the
  /// x-gap untouched).
  double c_leg(double want) {
    const double lever = half_sin_y();
    if (std::abs(lever) < 1e-300) throw PlanError("plan_two_point: vanished y lever");
    const double mid = (state_.p1.y() + state_.p2.y()) / 2.0;
    double amp = want / (2.0 * lever);
    double applied = want;
    if (std::abs(amp) > u_max_) {
      applied = want * (u_max_ / std::abs(amp));
      amp = amp > 0 ? u_max_ : -u_max_;
    }
    apply(make_sample(0.0, 0.0, effective(amp), 0.0, 0.0, phase_for_cos(mid, 1.0)));
    return applied;
  }

  /// B-shear leg changing the pair z-gap via the x lever (sin slot keeps the
  /// y-gap untouched).
  double b_leg(double want) {
    const double lever = half_sin_x();
    if (std::abs(lever) < 1e-300) throw PlanError("plan_two_point: vanished x lever");
    const double mid = (state_.p1.x() + state_.p2.x()) / 2.0;
    double amp = -want / (2.0 * lever);
    double applied = want;
    if (std::abs(amp) > u_max_) {
      applied = want * (u_max_ / std::abs(amp));
      amp = amp > 0 ? u_max_ : -u_max_;
    }
    apply(make_sample(0.0, effective(amp), 0.0, 0.0, phase_for_sin(mid, 1.0), 0.0));
    return applied;
  }

 private:
  // inverse_step applies the negated amplitudes, so emitted samples carry
  // the opposite sign to realize the solved coefficient.
  double effective(double amp) const { return inverse_ ? -amp : amp; }

  PairState state_;
  double u_max_;
  bool inverse_;
  std::vector<NoiseSample> emitted_;
};

constexpr int kTwoPointStepCap = 20000;

/// Brings the pair gap to exactly (0, 0, g).  When `negotiable` and the pair
/// already has equal x and y coordinates, its current z-gap is adopted as g.
/// Returns the achieved g.
double contract_pair(PairSteering& steer, double g_requested, bool negotiable) {
  const Vec3 gap0 = steer.state().gap();
  if (std::abs(gap0.x()) < 1e-12 && std::abs(gap0.y()) < 1e-12) {
    if (negotiable) return gap0.z();
    if (std::abs(wrap_signed(gap0.z() - g_requested)) < 1e-12) return g_requested;
  }

  int budget = kTwoPointStepCap;
  const auto spend = [&budget] {
    if (--budget < 0) throw PlanError("plan_two_point: step cap exceeded");
  };

  // make the z lever workable if an x/y lever is available
  while (std::abs(steer.half_sin_z()) < 0.02) {
    const double lx = std::abs(steer.half_sin_x());
    const double ly = std::abs(steer.half_sin_y());
    if (std::max(lx, ly) < 1e-8) break;  // proceed with whatever lever exists
    spend();
    const double dz = steer.state().gap().z();
    const double want = wrap_signed(0.5 * sign_or_one(dz) - dz);
    if (ly >= lx)
      steer.c_leg(want);
    else
      steer.b_leg(want);
  }

  const double g = g_requested;
  const double kill_lever = std::abs(std::sin(g / 2.0));
  if (kill_lever < 1e-300) throw PlanError("plan_two_point: degenerate meeting gap");
  // intermediate x/y gaps: small enough that the final kill amplitude
  // eps1 / (2 kill_lever) stays <= 1/2
  const double eps1 = std::min(std::abs(g), kill_lever);

  const auto steer_a = [&](double target, bool x_slot) {
    for (;;) {
      const Vec3 gap = steer.state().gap();
      const double cur = x_slot ? gap.x() : gap.y();
      const double want = wrap_signed(target - cur);
      if (std::abs(want) < 5e-15) return;
      spend();
      steer.a_leg(want, x_slot);
    }
  };
  const auto steer_z = [&](double target) {
    for (;;) {
      const double want = wrap_signed(target - steer.state().gap().z());
      if (std::abs(want) < 5e-15) return;
      spend();
      steer.c_leg(want);
    }
  };

  steer_a(eps1, true);   // x-gap -> eps1
  steer_a(eps1, false);  // y-gap -> eps1
  steer_z(g);            // z-gap -> g, levered by the held y-gap
  steer_a(0.0, true);    // exact kill of the x-gap
  steer_a(0.0, false);   // exact kill of the y-gap
  return g;
}

/// Rigid pair translation with A = 0: with equal x and y coordinates the
/// difference vector is exactly preserved while p1 travels to `target`.
/// First (x, z) legs via the C slot, then (y, z) legs via the B slot.
void translate_pair(PairSteering& steer, const Vec3& target, double u_max) {
  const auto steer_2d = [&](bool c_slot) {
    for (int guard = 0; guard < 64; ++guard) {
      const Vec3& p = steer.state().p1;
      const Eigen::Vector2d d = c_slot
          ? Eigen::Vector2d(wrap_signed(target.x() - p.x()), wrap_signed(target.z() - p.z()))
          : Eigen::Vector2d(wrap_signed(target.y() - p.y()), wrap_signed(target.z() - p.z()));
      if (d.norm() < 1e-13) return;
      const int legs = std::max(1, static_cast<int>(std::ceil(d.norm() / u_max)));
      const Eigen::Vector2d leg = d / legs;
      if (c_slot)  // x += C cos(y+gamma), z += C sin(y+gamma)
        steer.apply(make_sample(0.0, 0.0, leg.norm(), 0.0, 0.0,
                                wrap_angle(std::atan2(leg.y(), leg.x()) - p.y())));
      else  // y += B sin(x+beta), z += B cos(x+beta)
        steer.apply(make_sample(0.0, leg.norm(), 0.0, 0.0,
                                wrap_angle(std::atan2(leg.x(), leg.y()) - p.x()), 0.0));
    }
    throw PlanError("plan_two_point: rigid translation failed to converge");
  };
  steer_2d(true);
  steer_2d(false);
}

}  // namespace

ControlPlan plan_pair_contraction(const Vec3& x1, const Vec3& x2, double u_max,
                                  double epsilon) {
  if (!(u_max > 1.0)) throw PlanError("plan_pair_contraction: requires u-max > 1");
  if (!(epsilon > 0.0 && epsilon <= kPi / 2.0))
    throw PlanError("plan_pair_contraction: epsilon must lie in (0, pi/2]");
  const PairState start{wrap_point<double>(x1), wrap_point<double>(x2)};
  if (torus_distance<double>(start.p1, start.p2) < 1e-9)
    throw PlanError("plan_pair_contraction: inputs too close to the diagonal");
  PairSteering steer(start, u_max, /*inverse=*/false);
  contract_pair(steer, epsilon, /*negotiable=*/false);
  ControlPlan plan;
  plan.samples = steer.emitted();
  check_amplitudes(plan.samples, u_max);
  const Vec3 end1 = replay_position(plan, start.p1);
  const Vec3 end2 = replay_position(plan, start.p2);
  const Vec3 gap = torus_displacement<double>(end2, end1);
  plan.position_error = std::hypot(gap.x(), gap.y());
  plan.position_error_second = std::abs(wrap_signed(gap.z() - epsilon));
  return plan;
}

ControlPlan plan_two_point(const Vec3& x1, const Vec3& x2, const Vec3& x1_star,
                           const Vec3& x2_star, double u_max, double epsilon) {
  if (!(u_max > 1.0)) throw PlanError("plan_two_point: requires u-max > 1");
  if (!(epsilon > 0.0 && epsilon <= kPi / 2.0))
    throw PlanError("plan_two_point: epsilon must lie in (0, pi/2]");
  if (epsilon / (2.0 * std::sin(epsilon / 2.0)) > u_max)
    throw PlanError("plan_two_point: epsilon inadmissible for this u-max");
  const PairState start{wrap_point<double>(x1), wrap_point<double>(x2)};
  const PairState target{wrap_point<double>(x1_star), wrap_point<double>(x2_star)};
  if (torus_distance<double>(start.p1, start.p2) < 1e-9 ||
      torus_distance<double>(target.p1, target.p2) < 1e-9)
    throw PlanError("plan_two_point: inputs too close to the diagonal");

  // contract the target pair under the inverse flow first; its achieved gap
  // fixes the meeting gap for the forward side
  PairSteering backward(target, u_max, /*inverse=*/true);
  const double g = contract_pair(backward, epsilon, /*negotiable=*/true);

  PairSteering forward(start, u_max, /*inverse=*/false);
  contract_pair(forward, g, /*negotiable=*/false);
  translate_pair(forward, backward.state().p1, u_max);

  ControlPlan plan;
  plan.samples = forward.emitted();
  plan.samples.insert(plan.samples.end(), backward.emitted().rbegin(),
                      backward.emitted().rend());
  check_amplitudes(plan.samples, u_max);
  plan.position_error = torus_distance<double>(replay_position(plan, start.p1), target.p1);
  plan.position_error_second =
      torus_distance<double>(replay_position(plan, start.p2), target.p2);
  return plan;
}

}  // namespace abclab
