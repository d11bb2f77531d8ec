#pragma once

// Lagrangian inverse dynamics of the planar arm with a point tool mass at the
// hand, plus the mapping of hand forces to joint torques.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "armfatigue/errors.hpp"
#include "armfatigue/kinematics.hpp"

namespace armfatigue {

inline constexpr double kStandardGravity = 9.81;

template <typename Scalar = double>
struct SegmentParams {
  Scalar mass{};
  /// Distance of the center of mass from the proximal joint.
  Scalar com_distance{};
  /// About the center of mass, lateral axis.
  Scalar inertia_com{};
  Scalar length{};
};

template <typename Scalar = double>
struct ArmInertialModel {
  SegmentParams<Scalar> upper_arm;
  SegmentParams<Scalar> forearm_hand;
  /// Point mass carried at the hand.
  Scalar tool_mass{};
  Scalar gravity = Scalar(kStandardGravity);

  ArmGeometry<Scalar> geometry(ElbowBranch branch = ElbowBranch::kDown) const {
    return {upper_arm.length, forearm_hand.length, branch};
  }
};

/// Regression fractions of stature / body mass per segment.
struct SegmentFractions {
  double length_of_stature;
  double mass_of_body;
  double com_of_length;
  double gyration_of_length;
};

inline constexpr SegmentFractions kUpperArmFractions{0.186, 0.028, 0.436, 0.322};
inline constexpr SegmentFractions kForearmHandFractions{0.254, 0.022, 0.682, 0.468};

template <typename Scalar = double>
SegmentParams<Scalar> segment_from_fractions(const SegmentFractions& f, const Scalar& stature,
                                             const Scalar& body_mass) {
  SegmentParams<Scalar> s;
  s.length = Scalar(f.length_of_stature) * stature;
  s.mass = Scalar(f.mass_of_body) * body_mass;
  s.com_distance = Scalar(f.com_of_length) * s.length;
  const Scalar radius = Scalar(f.gyration_of_length) * s.length;
  s.inertia_com = s.mass * radius * radius;
  return s;
}

/// Segment parameters from stature [m] and body mass [kg]. No tool mass.
template <typename Scalar = double>
ArmInertialModel<Scalar> derive_anthropometry(const Scalar& stature, const Scalar& body_mass) {
  if (!(stature >= Scalar(1.0) && stature <= Scalar(2.5))) {
    std::ostringstream msg;
    msg << "stature " << stature << " m outside [1.0, 2.5]";
    throw OutOfRangeAnthropometry(msg.str());
  }
  if (!(body_mass >= Scalar(30) && body_mass <= Scalar(200))) {
    std::ostringstream msg;
    msg << "body mass " << body_mass << " kg outside [30, 200]";
    throw OutOfRangeAnthropometry(msg.str());
  }
  ArmInertialModel<Scalar> m;
  m.upper_arm = segment_from_fractions(kUpperArmFractions, stature, body_mass);
  m.forearm_hand = segment_from_fractions(kForearmHandFractions, stature, body_mass);
  return m;
}

namespace detail {

// Lumped constants of the two-link chain with the tool at the hand.
template <typename Scalar>
struct ChainConstants {
  Scalar proximal;    // I1 + m1 c1^2 + (m2 + m_tool) L1^2
  Scalar distal;      // I2 + m2 c2^2 + m_tool L2^2
  Scalar coupling;    // (m2 c2 + m_tool L2) L1
  Scalar moment1;     // m1 c1 + (m2 + m_tool) L1
  Scalar moment2;     // m2 c2 + m_tool L2
};

template <typename Scalar>
ChainConstants<Scalar> chain_constants(const ArmInertialModel<Scalar>& m) {
  const auto& u = m.upper_arm;
  const auto& f = m.forearm_hand;
  const Scalar distal_mass = f.mass + m.tool_mass;
  ChainConstants<Scalar> c;
  c.proximal = u.inertia_com + u.mass * u.com_distance * u.com_distance + distal_mass * u.length * u.length;
  c.distal = f.inertia_com + f.mass * f.com_distance * f.com_distance + m.tool_mass * f.length * f.length;
  c.moment2 = f.mass * f.com_distance + m.tool_mass * f.length;
  c.moment1 = u.mass * u.com_distance + distal_mass * u.length;
  c.coupling = c.moment2 * u.length;
  return c;
}

}  // namespace detail

template <typename Scalar>
Mat2<Scalar> mass_matrix(const ArmInertialModel<Scalar>& model, const Vec2<Scalar>& theta) {
  using std::cos;
  const auto c = detail::chain_constants(model);
  const Scalar h = c.coupling * cos(theta[kElbow]);
  Mat2<Scalar> m;
  m << c.proximal + c.distal + Scalar(2) * h, c.distal + h, c.distal + h, c.distal;
  return m;
}

/// Christoffel-form C(theta, theta_dot); Mdot - 2C is skew-symmetric.
template <typename Scalar>
Mat2<Scalar> coriolis_matrix(const ArmInertialModel<Scalar>& model, const Vec2<Scalar>& theta,
                             const Vec2<Scalar>& velocity) {
  using std::sin;
  const auto c = detail::chain_constants(model);
  const Scalar hs = c.coupling * sin(theta[kElbow]);
  Mat2<Scalar> m;
  m << -hs * velocity[kElbow], -hs * (velocity[kShoulder] + velocity[kElbow]), hs * velocity[kShoulder],
      Scalar(0);
  return m;
}

template <typename Scalar>
Vec2<Scalar> gravity_torque(const ArmInertialModel<Scalar>& model, const Vec2<Scalar>& theta) {
  using std::sin;
  const auto c = detail::chain_constants(model);
  const Scalar distal = model.gravity * c.moment2 * sin(theta[kShoulder] + theta[kElbow]);
  return Vec2<Scalar>(model.gravity * c.moment1 * sin(theta[kShoulder]) + distal, distal);
}

template <typename Scalar>
Scalar kinetic_energy(const ArmInertialModel<Scalar>& model, const JointState<Scalar>& s) {
  return Scalar(0.5) * s.velocity.dot(mass_matrix(model, s.theta) * s.velocity);
}

/// Relative to shoulder height.
template <typename Scalar>
Scalar potential_energy(const ArmInertialModel<Scalar>& model, const Vec2<Scalar>& theta) {
  using std::cos;
  const auto c = detail::chain_constants(model);
  return -model.gravity * (c.moment1 * cos(theta[kShoulder]) + c.moment2 * cos(theta[kShoulder] + theta[kElbow]));
}

/// Body torques M(theta) theta_ddot + C theta_dot + G(theta) [N m].
template <typename Scalar>
Vec2<Scalar> inverse_dynamics(const ArmInertialModel<Scalar>& model, const JointState<Scalar>& s) {
  return mass_matrix(model, s.theta) * s.acceleration +
         coriolis_matrix(model, s.theta, s.velocity) * s.velocity + gravity_torque(model, s.theta);
}

/// Gamma_ext = J^T F_hand for a force F_hand at the hand point. Added to the
/// body torques as the external-load share of the joint demand.
template <typename Scalar>
Vec2<Scalar> external_joint_torque(const ArmGeometry<Scalar>& geom, const Vec2<Scalar>& theta,
                                   const Vec2<Scalar>& hand_force) {
  return jacobian(geom, theta).transpose() * hand_force;
}

template <typename Scalar>
Vec2<Scalar> total_joint_torque(const ArmInertialModel<Scalar>& model, const ArmGeometry<Scalar>& geom,
                                const JointState<Scalar>& s, const Vec2<Scalar>& hand_force) {
  return inverse_dynamics(model, s) + external_joint_torque(geom, s.theta, hand_force);
}

// Task loads ---------------------------------------------------------------

/// How the task's push/pull force magnitudes relate to the hand force.
enum class ForceConvention {
  /// The magnitudes are forces the hand exerts on the environment (push +x,
  /// pull -x); the hand feels the opposite reaction.
  kExertedByHand,
  /// The magnitudes are the forces acting on the hand (push +x, pull -x).
  kReactionOnHand,
};

struct LoadSpec {
  double push_force = 0.0;
  double pull_force = 0.0;
  ForceConvention convention = ForceConvention::kExertedByHand;
};

enum class Phase { kPush, kPull };

/// F_hand during a phase: the reaction to the exerted force by default, so a
/// forward push above shoulder height loads the shoulder in flexion.
inline Vector2d hand_force(const LoadSpec& loads, Phase phase) {
  const Vector2d task = phase == Phase::kPush ? Vector2d(loads.push_force, 0.0) : Vector2d(-loads.pull_force, 0.0);
  return loads.convention == ForceConvention::kExertedByHand ? Vector2d(-task) : task;
}

}  // namespace armfatigue
