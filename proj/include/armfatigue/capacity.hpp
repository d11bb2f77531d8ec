#pragma once

// Posture-dependent maximal voluntary joint torque from Chaffin's static
// strength polynomials. Polynomials take degrees and return N m.

#include <array>

#include "armfatigue/dynamics.hpp"
#include "armfatigue/kinematics.hpp"

namespace armfatigue {

enum class Gender { kMale, kFemale };
enum class Movement { kFlexion, kExtension };

/// (c0 + c1 theta_e + c2 theta_e^2 + c3 theta_s) * G, angles in degrees.
struct CapacityRow {
  double constant = 0.0;
  double theta_e = 0.0;
  double theta_e_sq = 0.0;
  double theta_s = 0.0;
  double gain_male = 0.0;
  double gain_female = 0.0;

  double gain(Gender g) const { return g == Gender::kMale ? gain_male : gain_female; }
  double polynomial(double theta_s_deg, double theta_e_deg) const {
    return constant + theta_e * theta_e_deg + theta_e_sq * theta_e_deg * theta_e_deg + theta_s * theta_s_deg;
  }
  bool operator==(const CapacityRow&) const = default;
};

struct CapacityCoefficients {
  CapacityRow elbow_flexion;
  CapacityRow elbow_extension;
  CapacityRow shoulder_flexion;
  CapacityRow shoulder_extension;

  /// Table values for an average adult.
  static CapacityCoefficients chaffin();

  const CapacityRow& row(Joint joint, Movement movement) const;
  CapacityRow& row(Joint joint, Movement movement);
  bool operator==(const CapacityCoefficients&) const = default;
};

/// Polynomial times gain before clamping; may be <= 0 outside the regression's
/// valid posture range.
double raw_joint_capacity(const CapacityCoefficients& coeffs, Joint joint, Movement movement,
                          double theta_s_deg, double theta_e_deg, Gender gender);

/// Gamma_MVC [N m], clamped at 0 from below.
double joint_capacity(const CapacityCoefficients& coeffs, Joint joint, Movement movement,
                      double theta_s_deg, double theta_e_deg, Gender gender);

/// Push: shoulder flexion + elbow extension. Pull: shoulder extension + elbow flexion.
Movement movement_for(Phase phase, Joint joint);

/// Per-joint Gamma_MVC of the muscle groups driving `phase`, with joint
/// angles in radians (kinematics convention).
Vector2d phase_capacity(const CapacityCoefficients& coeffs, Phase phase, const Vector2d& theta_rad,
                        Gender gender);

/// True when any active-group polynomial is <= 0 at this posture.
bool phase_capacity_non_positive(const CapacityCoefficients& coeffs, Phase phase, const Vector2d& theta_rad,
                                 Gender gender);

// Muscle groups ------------------------------------------------------------

enum class MuscleGroup : int {
  kShoulderFlexor = 0,
  kShoulderExtensor = 1,
  kElbowFlexor = 2,
  kElbowExtensor = 3,
};

inline constexpr std::array<MuscleGroup, 4> kAllGroups{MuscleGroup::kShoulderFlexor, MuscleGroup::kShoulderExtensor,
                                                       MuscleGroup::kElbowFlexor, MuscleGroup::kElbowExtensor};

/// Per-group values indexed by MuscleGroup.
using GroupValues = std::array<double, 4>;

inline double& at(GroupValues& v, MuscleGroup g) { return v[static_cast<int>(g)]; }
inline double at(const GroupValues& v, MuscleGroup g) { return v[static_cast<int>(g)]; }

MuscleGroup group_for(Joint joint, Movement movement);
MuscleGroup active_group(Phase phase, Joint joint);
Joint joint_of(MuscleGroup group);
Movement movement_of(MuscleGroup group);
const char* group_name(MuscleGroup group);

}  // namespace armfatigue
