#include "armfatigue/capacity.hpp"

#include <algorithm>
#include <numbers>
#include <utility>

namespace armfatigue {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

}  // namespace

CapacityCoefficients CapacityCoefficients::chaffin() {
  CapacityCoefficients c;
  c.elbow_flexion = {336.29, 1.544, -0.0085, -0.5, 0.1913, 0.1005};
  c.elbow_extension = {264.153, 0.575, 0.0, -0.425, 0.2126, 0.1153};
  c.shoulder_flexion = {227.338, 0.525, 0.0, -0.296, 0.2854, 0.1495};
  c.shoulder_extension = {204.562, 0.0, 0.0, 0.099, 0.4957, 0.2485};
  return c;
}

const CapacityRow& CapacityCoefficients::row(Joint joint, Movement movement) const {
  if (joint == kElbow) return movement == Movement::kFlexion ? elbow_flexion : elbow_extension;
  return movement == Movement::kFlexion ? shoulder_flexion : shoulder_extension;
}

CapacityRow& CapacityCoefficients::row(Joint joint, Movement movement) {
  return const_cast<CapacityRow&>(std::as_const(*this).row(joint, movement));
}

double raw_joint_capacity(const CapacityCoefficients& coeffs, Joint joint, Movement movement,
                          double theta_s_deg, double theta_e_deg, Gender gender) {
  const CapacityRow& r = coeffs.row(joint, movement);
  return r.polynomial(theta_s_deg, theta_e_deg) * r.gain(gender);
}

double joint_capacity(const CapacityCoefficients& coeffs, Joint joint, Movement movement,
                      double theta_s_deg, double theta_e_deg, Gender gender) {
  return std::max(0.0, raw_joint_capacity(coeffs, joint, movement, theta_s_deg, theta_e_deg, gender));
}

Movement movement_for(Phase phase, Joint joint) {
  const bool push = phase == Phase::kPush;
  if (joint == kShoulder) return push ? Movement::kFlexion : Movement::kExtension;
  return push ? Movement::kExtension : Movement::kFlexion;
}

Vector2d phase_capacity(const CapacityCoefficients& coeffs, Phase phase, const Vector2d& theta_rad,
                        Gender gender) {
  const double s = theta_rad[kShoulder] * kDegPerRad;
  const double e = theta_rad[kElbow] * kDegPerRad;
  return {joint_capacity(coeffs, kShoulder, movement_for(phase, kShoulder), s, e, gender),
          joint_capacity(coeffs, kElbow, movement_for(phase, kElbow), s, e, gender)};
}

bool phase_capacity_non_positive(const CapacityCoefficients& coeffs, Phase phase, const Vector2d& theta_rad,
                                 Gender gender) {
  const double s = theta_rad[kShoulder] * kDegPerRad;
  const double e = theta_rad[kElbow] * kDegPerRad;
  return raw_joint_capacity(coeffs, kShoulder, movement_for(phase, kShoulder), s, e, gender) <= 0.0 ||
         raw_joint_capacity(coeffs, kElbow, movement_for(phase, kElbow), s, e, gender) <= 0.0;
}

MuscleGroup group_for(Joint joint, Movement movement) {
  if (joint == kShoulder) {
    return movement == Movement::kFlexion ? MuscleGroup::kShoulderFlexor : MuscleGroup::kShoulderExtensor;
  }
  return movement == Movement::kFlexion ? MuscleGroup::kElbowFlexor : MuscleGroup::kElbowExtensor;
}

MuscleGroup active_group(Phase phase, Joint joint) { return group_for(joint, movement_for(phase, joint)); }

Joint joint_of(MuscleGroup group) {
  return (group == MuscleGroup::kShoulderFlexor || group == MuscleGroup::kShoulderExtensor) ? kShoulder : kElbow;
}

Movement movement_of(MuscleGroup group) {
  return (group == MuscleGroup::kShoulderFlexor || group == MuscleGroup::kElbowFlexor) ? Movement::kFlexion
                                                                                       : Movement::kExtension;
}

const char* group_name(MuscleGroup group) {
  switch (group) {
    case MuscleGroup::kShoulderFlexor:
      return "shoulder_flexor";
    case MuscleGroup::kShoulderExtensor:
      return "shoulder_extensor";
    case MuscleGroup::kElbowFlexor:
      return "elbow_flexor";
    case MuscleGroup::kElbowExtensor:
      return "elbow_extensor";
  }
  return "unknown";
}

}  // namespace armfatigue
