#pragma once

// Planar two-link arm (shoulder + elbow) in the sagittal plane.
//
// Frame: shoulder at the origin, x forward, z up. theta_s is measured from
// the downward vertical (0 = arm hanging straight), positive forward.
// theta_e is 0 at full extension and positive in flexion. Index 0 of every
// joint-space vector is the shoulder, index 1 the elbow.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "armfatigue/errors.hpp"

namespace armfatigue {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

using Vector2d = Vec2<double>;
using Matrix2d = Mat2<double>;

enum Joint : int { kShoulder = 0, kElbow = 1 };

/// elbow_down keeps the elbow below the shoulder-to-hand chord (theta_e >= 0).
enum class ElbowBranch { kDown, kUp };

/// Angular distance from full extension under which a posture is singular.
inline constexpr double kSingularTolerance = 1e-6;

template <typename Scalar = double>
struct ArmGeometry {
  Scalar upper_arm_length{};
  /// Forearm, wrist and hand as one rigid body.
  Scalar forearm_hand_length{};
  ElbowBranch elbow_branch = ElbowBranch::kDown;

  Scalar outer_radius() const { return upper_arm_length + forearm_hand_length; }
  Scalar inner_radius() const {
    using std::abs;
    return abs(upper_arm_length - forearm_hand_length);
  }
};

template <typename Scalar = double>
struct JointState {
  Vec2<Scalar> theta = Vec2<Scalar>::Zero();
  Vec2<Scalar> velocity = Vec2<Scalar>::Zero();
  Vec2<Scalar> acceleration = Vec2<Scalar>::Zero();
  Scalar t{};
};

template <typename Scalar = double>
struct CartesianState {
  Vec2<Scalar> position = Vec2<Scalar>::Zero();
  Vec2<Scalar> velocity = Vec2<Scalar>::Zero();
  Vec2<Scalar> acceleration = Vec2<Scalar>::Zero();
};

/// Normalized time-scaling of a point-to-point move.
enum class BlendProfile {
  kCubic,    ///< 3u^2 - 2u^3: rest-to-rest in velocity only.
  kQuintic,  ///< 10u^3 - 15u^4 + 6u^5: rest-to-rest in velocity and acceleration.
};

template <typename Scalar = double>
struct TrajectoryLeg {
  Vec2<Scalar> start = Vec2<Scalar>::Zero();
  Vec2<Scalar> end = Vec2<Scalar>::Zero();
  Scalar duration{};
  BlendProfile blend = BlendProfile::kQuintic;
};

template <typename Scalar>
struct ArmPoints {
  Vec2<Scalar> elbow;
  Vec2<Scalar> hand;
};

template <typename Scalar>
struct IkSolution {
  Vec2<Scalar> theta;
  /// Within kSingularTolerance of full extension.
  bool singular = false;
};

namespace detail {

// Unit vector of a segment at absolute angle `a` from the downward vertical.
template <typename Scalar>
Vec2<Scalar> segment_direction(const Scalar& a) {
  using std::cos;
  using std::sin;
  return Vec2<Scalar>(sin(a), -cos(a));
}

// d/da of segment_direction.
template <typename Scalar>
Vec2<Scalar> segment_normal(const Scalar& a) {
  using std::cos;
  using std::sin;
  return Vec2<Scalar>(cos(a), sin(a));
}

}  // namespace detail

template <typename Scalar>
ArmPoints<Scalar> forward_kinematics(const ArmGeometry<Scalar>& geom,
                                     const Vec2<Scalar>& theta) {
  const Scalar forearm_angle = theta[kShoulder] + theta[kElbow];
  ArmPoints<Scalar> out;
  out.elbow = geom.upper_arm_length * detail::segment_direction(theta[kShoulder]);
  out.hand = out.elbow + geom.forearm_hand_length * detail::segment_direction(forearm_angle);
  return out;
}

template <typename Scalar>
ArmPoints<Scalar> forward_kinematics(const ArmGeometry<Scalar>& geom,
                                     const Scalar& theta_s, const Scalar& theta_e) {
  return forward_kinematics(geom, Vec2<Scalar>(theta_s, theta_e));
}

/// Closed-form inverse kinematics on the configured elbow branch.
/// Throws UnreachableTarget unless the target lies strictly inside the
/// annulus shrunk by `margin`.
template <typename Scalar>
IkSolution<Scalar> inverse_kinematics(const ArmGeometry<Scalar>& geom,
                                      const Vec2<Scalar>& target,
                                      const Scalar& margin = Scalar(0)) {
  using std::acos;
  using std::atan2;
  using std::cos;
  using std::sin;
  const Scalar l1 = geom.upper_arm_length;
  const Scalar l2 = geom.forearm_hand_length;
  const Scalar r = target.norm();
  if (!(r > geom.inner_radius() + margin && r < geom.outer_radius() - margin)) {
    std::ostringstream msg;
    msg << "target (" << target[0] << ", " << target[1] << ") at distance " << r
        << " m is outside the reachable annulus [" << geom.inner_radius() << ", "
        << geom.outer_radius() << "]";
    throw UnreachableTarget(msg.str());
  }

  Scalar c = (target.squaredNorm() - l1 * l1 - l2 * l2) / (Scalar(2) * l1 * l2);
  if (c > Scalar(1)) c = Scalar(1);
  if (c < Scalar(-1)) c = Scalar(-1);
  Scalar theta_e = acos(c);
  if (geom.elbow_branch == ElbowBranch::kUp) theta_e = -theta_e;

  const Scalar bearing = atan2(target[0], -target[1]);
  const Scalar interior = atan2(l2 * sin(theta_e), l1 + l2 * cos(theta_e));

  IkSolution<Scalar> out;
  out.theta = Vec2<Scalar>(bearing - interior, theta_e);
  out.singular = std::abs(static_cast<double>(theta_e)) < kSingularTolerance;
  return out;
}

/// d(hand)/d(theta), 2x2 [m/rad]. Column norms are the joint-to-hand distances.
template <typename Scalar>
Mat2<Scalar> jacobian(const ArmGeometry<Scalar>& geom, const Vec2<Scalar>& theta) {
  const Scalar forearm_angle = theta[kShoulder] + theta[kElbow];
  const Vec2<Scalar> n2 = geom.forearm_hand_length * detail::segment_normal(forearm_angle);
  Mat2<Scalar> j;
  j.col(kShoulder) = geom.upper_arm_length * detail::segment_normal(theta[kShoulder]) + n2;
  j.col(kElbow) = n2;
  return j;
}

/// Time derivative of the Jacobian along (theta, theta_dot).
template <typename Scalar>
Mat2<Scalar> jacobian_derivative(const ArmGeometry<Scalar>& geom, const Vec2<Scalar>& theta,
                                 const Vec2<Scalar>& velocity) {
  const Scalar forearm_angle = theta[kShoulder] + theta[kElbow];
  const Scalar forearm_rate = velocity[kShoulder] + velocity[kElbow];
  const Vec2<Scalar> d2 =
      -geom.forearm_hand_length * forearm_rate * detail::segment_direction(forearm_angle);
  Mat2<Scalar> jd;
  jd.col(kShoulder) = -geom.upper_arm_length * velocity[kShoulder] *
                          detail::segment_direction(theta[kShoulder]) +
                      d2;
  jd.col(kElbow) = d2;
  return jd;
}

/// Blend value p(u) and its first two derivatives with respect to u.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> blend(BlendProfile profile, const Scalar& u) {
  Eigen::Matrix<Scalar, 3, 1> out;
  switch (profile) {
    case BlendProfile::kCubic:
      out << Scalar(3) * u * u - Scalar(2) * u * u * u, Scalar(6) * u - Scalar(6) * u * u,
          Scalar(6) - Scalar(12) * u;
      break;
    case BlendProfile::kQuintic: {
      const Scalar u2 = u * u;
      const Scalar u3 = u2 * u;
      out << Scalar(10) * u3 - Scalar(15) * u2 * u2 + Scalar(6) * u3 * u2,
          Scalar(30) * u2 - Scalar(60) * u3 + Scalar(30) * u2 * u2,
          Scalar(60) * u - Scalar(180) * u2 + Scalar(120) * u3;
      break;
    }
  }
  return out;
}

/// Hand state at leg-local time t in [0, duration].
template <typename Scalar>
CartesianState<Scalar> sample_task_trajectory(const TrajectoryLeg<Scalar>& leg, const Scalar& t) {
  const Scalar slack = Scalar(1e-9) * (Scalar(1) + leg.duration);
  if (!(leg.duration > Scalar(0))) throw TimeOutOfRange("trajectory leg has non-positive duration");
  if (!(t >= -slack && t <= leg.duration + slack)) {
    std::ostringstream msg;
    msg << "t = " << t << " s outside [0, " << leg.duration << "]";
    throw TimeOutOfRange(msg.str());
  }
  Scalar u = t / leg.duration;
  if (u < Scalar(0)) u = Scalar(0);
  if (u > Scalar(1)) u = Scalar(1);
  const auto p = blend(leg.blend, u);
  const Vec2<Scalar> delta = leg.end - leg.start;
  CartesianState<Scalar> out;
  out.position = leg.start + p[0] * delta;
  out.velocity = (p[1] / leg.duration) * delta;
  out.acceleration = (p[2] / (leg.duration * leg.duration)) * delta;
  return out;
}

/// Joint state reproducing a hand state: theta by IK, theta_dot = J^-1 v,
/// theta_ddot = J^-1 (a - Jdot theta_dot) with the analytic Jdot.
template <typename Scalar>
JointState<Scalar> joint_state_for(const ArmGeometry<Scalar>& geom, const CartesianState<Scalar>& hand,
                                   const Scalar& t) {
  const IkSolution<Scalar> ik = inverse_kinematics(geom, hand.position);
  if (ik.singular) {
    std::ostringstream msg;
    msg << "arm is fully extended at t = " << t << " s";
    throw SingularTrajectory(msg.str());
  }
  JointState<Scalar> s;
  s.t = t;
  s.theta = ik.theta;
  const Mat2<Scalar> j_inv = jacobian(geom, s.theta).inverse();
  s.velocity = j_inv * hand.velocity;
  s.acceleration =
      j_inv * (hand.acceleration - jacobian_derivative(geom, s.theta, s.velocity) * s.velocity);
  return s;
}

/// Samples a leg at a fixed step. dt must divide the leg duration; the last
/// sample lands on the leg end. Times are leg-local.
template <typename Scalar>
std::vector<JointState<Scalar>> joint_trajectory(const ArmGeometry<Scalar>& geom,
                                                 const TrajectoryLeg<Scalar>& leg, const Scalar& dt) {
  using std::llround;
  if (!(dt > Scalar(0))) throw TimeOutOfRange("time step must be positive");
  const long long steps = llround(static_cast<double>(leg.duration / dt));
  if (steps < 1 || std::abs(static_cast<double>(steps * dt - leg.duration)) > 1e-9) {
    std::ostringstream msg;
    msg << "time step " << dt << " s does not divide leg duration " << leg.duration << " s";
    throw TimeOutOfRange(msg.str());
  }
  std::vector<JointState<Scalar>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (long long i = 0; i <= steps; ++i) {
    const Scalar t = (i == steps) ? leg.duration : Scalar(static_cast<double>(i)) * dt;
    out.push_back(joint_state_for(geom, sample_task_trajectory(leg, t), t));
  }
  return out;
}

}  // namespace armfatigue
