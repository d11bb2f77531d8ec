#pragma once

// Per-muscle-group fatigue over a repetitive push/pull task.
//
// Each group's current maximal torque follows
//   Gamma_cem(t) = Gamma_cem(0) * exp(-k * integral of |Gamma_joint| / Gamma_MVC)
// accumulated only while the group is active; inactive groups hold their
// value (no recovery). The motion is periodic, so one sampled cycle gives the
// per-cycle exponent increment of every group and any later instant is
// evaluated in O(1) from (cycle index, in-cycle partial exponent).

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "armfatigue/capacity.hpp"
#include "armfatigue/dynamics.hpp"
#include "armfatigue/kinematics.hpp"

namespace armfatigue {

struct CycleSchedule {
  double t_push = 5.0;
  double t_pull = 5.0;
  double t0 = 0.0;
  Phase starts_with = Phase::kPush;

  double period() const { return t_push + t_pull; }
  double duration(Phase p) const { return p == Phase::kPush ? t_push : t_pull; }
  /// Phase occupying in-cycle slot 0 or 1.
  Phase slot_phase(std::size_t slot) const {
    const Phase other = starts_with == Phase::kPush ? Phase::kPull : Phase::kPush;
    return slot == 0 ? starts_with : other;
  }
  std::size_t slot_of(Phase p) const { return p == starts_with ? 0 : 1; }
};

struct PhaseClock {
  Phase phase = Phase::kPush;
  /// Completed cycles since t0.
  long long cycle = 0;
  /// Offset inside the current cycle [s].
  double offset = 0.0;
  /// Cumulative time spent in `phase` since t0, current stretch included [s].
  double active_time = 0.0;
};

/// Throws NegativeTime for t < t0.
PhaseClock phase_clock(const CycleSchedule& sched, double t);

/// Everything needed to evaluate one task configuration.
struct TaskSetup {
  ArmInertialModel<double> body;
  ElbowBranch branch = ElbowBranch::kDown;
  CapacityCoefficients capacity = CapacityCoefficients::chaffin();
  Gender gender = Gender::kMale;
  LoadSpec loads;
  Vector2d p0 = Vector2d::Zero();
  Vector2d pf = Vector2d::Zero();
  BlendProfile blend = BlendProfile::kQuintic;
  CycleSchedule schedule;
  double k_shoulder_per_min = 0.17;
  double k_elbow_per_min = 0.24;
  double dt = 0.01;

  ArmGeometry<double> geometry() const { return body.geometry(branch); }
  double k_per_second(Joint j) const { return (j == kShoulder ? k_shoulder_per_min : k_elbow_per_min) / 60.0; }
  TrajectoryLeg<double> leg(Phase p) const;
};

enum class MvcMode {
  kQuasiStatic,          ///< Gamma_MVC follows the posture.
  kStaticMinOverCycle,   ///< Per-group minimum over the cycle's postures.
  kStaticMaxOverCycle,   ///< Per-group maximum over the cycle's postures.
  kStaticFixed,          ///< Per-group value supplied by the caller.
};

struct MvcPolicy {
  MvcMode mode = MvcMode::kQuasiStatic;
  GroupValues fixed_nm{};
};

struct PhaseSample {
  JointState<double> state;
  /// Signed net joint torque [N m].
  Vector2d torque = Vector2d::Zero();
  /// |torque|, attributed to the active group of each joint.
  Vector2d demand = Vector2d::Zero();
  /// Active-group Gamma_MVC used for the ratio (policy applied).
  Vector2d mvc = Vector2d::Zero();
};

/// One phase of the cycle sampled at the task step, end points included.
struct PhaseProfile {
  Phase phase = Phase::kPush;
  std::size_t steps = 0;
  std::vector<PhaseSample> samples;
  /// Per joint: k * cumulative trapezoid of demand / mvc, samples.size() entries.
  std::array<std::vector<double>, 2> partial_exponent;
};

/// Cumulative trapezoid of k * demand / mvc. Throws ZeroCapacity if any
/// capacity is <= 0.
std::vector<double> cumulative_exponent(std::span<const double> demand, std::span<const double> mvc,
                                        double k_per_second, double dt);

/// Sampled cycle plus the per-group constants of the closed form.
class CycleFatigue {
 public:
  CycleFatigue(const TaskSetup& setup, const MvcPolicy& policy = {});

  const TaskSetup& setup() const { return setup_; }
  const MvcPolicy& policy() const { return policy_; }
  const PhaseProfile& slot(std::size_t i) const { return slots_[i]; }
  const PhaseProfile& profile(Phase p) const { return slots_[setup_.schedule.slot_of(p)]; }

  /// Exponent gained by each group over one full cycle.
  const GroupValues& increments() const { return increments_; }
  /// Gamma_cem at t0: Gamma_MVC at the group's first activation (or the
  /// static constant).
  const GroupValues& initial_capacity() const { return initial_capacity_; }
  /// Fraction of each group's active samples where the net torque acts
  /// against the group's own direction.
  const GroupValues& opposing_fraction() const { return opposing_fraction_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::size_t samples_per_cycle() const { return slots_[0].steps + slots_[1].steps; }

  /// Accumulated exponent of `group` at in-cycle sample `index` of `slot`
  /// during cycle `cycle`.
  double exponent(MuscleGroup group, long long cycle, std::size_t slot, std::size_t index) const;
  double capacity(MuscleGroup group, long long cycle, std::size_t slot, std::size_t index) const;

  /// Grid index k (time t0 + k dt) to (cycle, slot, index).
  struct GridPoint {
    long long cycle;
    std::size_t slot;
    std::size_t index;
  };
  GridPoint grid_point(long long k) const;

 private:
  TaskSetup setup_;
  MvcPolicy policy_;
  std::array<PhaseProfile, 2> slots_;
  GroupValues increments_{};
  GroupValues initial_capacity_{};
  GroupValues opposing_fraction_{};
  std::vector<std::string> warnings_;
};

/// Per-cycle exponent increment of each group.
GroupValues cycle_exponent_increments(const CycleFatigue& cf);

/// Per-group Gamma_cem at any t >= t0 by fast-forward.
GroupValues fatigue_at(const CycleFatigue& cf, double t);

struct FatigueTrace {
  std::vector<double> time;
  std::vector<Phase> phase;
  std::vector<Vector2d> theta;
  std::vector<Vector2d> torque;
  std::vector<Vector2d> demand;
  std::vector<Vector2d> mvc;
  /// Active group's Gamma_cem per joint.
  std::vector<Vector2d> capacity;
  std::vector<GroupValues> group_capacity;
  GroupValues initial_capacity{};

  std::size_t size() const { return time.size(); }
  bool empty() const { return time.empty(); }
};

/// Trace on the grid t0 + k dt, k = 0..duration/dt. Zero duration gives an
/// empty trace.
FatigueTrace build_trace(const CycleFatigue& cf, double duration);

FatigueTrace simulate(const TaskSetup& setup, double duration);
FatigueTrace simulate_static_mode(const TaskSetup& setup, double duration, const MvcPolicy& policy);

struct RiskCrossing {
  double time = 0.0;
  MuscleGroup group = MuscleGroup::kShoulderFlexor;
};

struct RiskCrossings {
  std::array<std::optional<RiskCrossing>, 2> joint;
};

/// First grid instant in [t0, t0 + horizon] where the active group's
/// Gamma_cem <= |Gamma_joint|, solved per sample from the periodic structure.
RiskCrossings detect_risk_crossing(const CycleFatigue& cf, double horizon);

/// Same predicate scanned over a dense trace.
RiskCrossings detect_risk_crossing(const FatigueTrace& trace);

}  // namespace armfatigue
