#pragma once

// Scenario files, run orchestration, trace CSV and grid sweeps.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "armfatigue/capacity.hpp"
#include "armfatigue/dynamics.hpp"
#include "armfatigue/fatigue.hpp"
#include "armfatigue/kinematics.hpp"

namespace armfatigue {

/// Optional per-field replacement of derived segment parameters.
struct SegmentOverride {
  std::optional<double> length_m;
  std::optional<double> mass_kg;
  std::optional<double> com_m;
  std::optional<double> inertia_kgm2;
  bool operator==(const SegmentOverride&) const = default;
  bool empty() const { return !length_m && !mass_kg && !com_m && !inertia_kgm2; }
};

struct OperatorSpec {
  double stature_m = 0.0;
  double body_mass_kg = 0.0;
  Gender gender = Gender::kMale;
  double k_shoulder_per_min = 0.17;
  double k_elbow_per_min = 0.24;
  SegmentOverride upper_arm;
  SegmentOverride forearm_hand;
  std::optional<CapacityCoefficients> capacity_coefficients;
  bool operator==(const OperatorSpec&) const = default;
};

struct TaskSpec {
  Vector2d p0 = Vector2d::Zero();
  Vector2d pf = Vector2d::Zero();
  double t_push_s = 0.0;
  double t_pull_s = 0.0;
  double push_force_n = 0.0;
  double pull_force_n = 0.0;
  double tool_mass_kg = 0.0;
  ForceConvention force_convention = ForceConvention::kExertedByHand;
  BlendProfile blend = BlendProfile::kQuintic;
  Phase starts_with = Phase::kPush;
  bool operator==(const TaskSpec&) const = default;
};

struct RunSpec {
  double duration_s = 0.0;
  double dt_s = 0.01;
  MvcMode mode = MvcMode::kQuasiStatic;
  ElbowBranch elbow_branch = ElbowBranch::kDown;
  std::optional<GroupValues> fixed_mvc_nm;
  double gravity_mps2 = kStandardGravity;
  bool operator==(const RunSpec&) const = default;
};

struct Scenario {
  OperatorSpec op;
  TaskSpec task;
  RunSpec run;
  bool operator==(const Scenario&) const = default;
};

/// Minimum distance of task endpoints from the reachable annulus boundary [m].
inline constexpr double kEndpointMargin = 1e-3;

/// Parses and validates JSON scenario text. Throws ParseError, SchemaError or
/// ValidationError (with the offending key path).
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);

/// JSON text that load_scenario maps back to an equal Scenario.
std::string serialize_scenario(const Scenario& s);

/// Re-checks every invariant; load_scenario calls this.
void validate_scenario(const Scenario& s);

ArmInertialModel<double> build_body(const Scenario& s);
TaskSetup build_task_setup(const Scenario& s);
MvcPolicy build_policy(const Scenario& s);

const char* mode_name(MvcMode m);
const char* phase_name(Phase p);

struct RunSummary {
  MvcMode mode = MvcMode::kQuasiStatic;
  double duration_s = 0.0;
  RiskCrossings crossings;
  GroupValues initial_capacity{};
  GroupValues final_capacity{};
  GroupValues cycle_increments{};
  std::vector<std::string> warnings;
};

struct RunResult {
  FatigueTrace trace;
  RunSummary summary;
};

/// kinematics -> dynamics -> capacity -> fatigue. With keep_trace = false the
/// trace is left empty and only the fast-forward summary is computed.
RunResult run(const Scenario& s, bool keep_trace = true);

std::string summary_json(const RunSummary& summary);

inline constexpr std::string_view kTraceHeader =
    "t_s,phase,theta_s_rad,theta_e_rad,gamma_joint_shoulder_nm,gamma_joint_elbow_nm,"
    "gamma_mvc_shoulder_nm,gamma_mvc_elbow_nm,gamma_cem_shoulder_nm,gamma_cem_elbow_nm,"
    "gamma_cem_shoulder_flexor_nm,gamma_cem_shoulder_extensor_nm,gamma_cem_elbow_flexor_nm,"
    "gamma_cem_elbow_extensor_nm";

/// Header plus one row per sample; shortest round-trip decimal numbers.
void write_trace_csv(const FatigueTrace& trace, std::ostream& out);
void write_trace_csv(const FatigueTrace& trace, const std::string& path);

// Sweep ----------------------------------------------------------------------

enum class SweepObjective { kMaxTimeToRisk, kMinTotalExponent };
enum class SweepJoint { kAny, kShoulder, kElbow };

struct Endpoints {
  Vector2d p0 = Vector2d::Zero();
  Vector2d pf = Vector2d::Zero();
  bool operator==(const Endpoints&) const = default;
};

/// Empty axes keep the base scenario's value.
struct SweepGrid {
  std::vector<Endpoints> endpoints;
  std::vector<Vector2d> p0;
  std::vector<Vector2d> pf;
  std::vector<double> push_force_n;
  std::vector<double> pull_force_n;
  std::vector<double> t_push_s;
  std::vector<double> t_pull_s;
  SweepObjective objective = SweepObjective::kMaxTimeToRisk;
  SweepJoint joint = SweepJoint::kAny;
};

SweepGrid load_grid(std::string_view text);
SweepGrid load_grid_file(const std::string& path);

/// Every combination of the grid, in grid order.
std::vector<Scenario> expand_grid(const Scenario& base, const SweepGrid& grid);

struct SweepCell {
  std::size_t index = 0;
  Scenario scenario;
  bool ok = false;
  std::string error;
  RunSummary summary;
  /// Seconds to the scored crossing (+inf if none within horizon) or the
  /// accumulated exponent, depending on the objective.
  double objective = 0.0;
  /// Accumulated exponent over the horizon for the scored joint(s).
  double total_exponent = 0.0;
};

struct SweepResult {
  SweepObjective objective = SweepObjective::kMaxTimeToRisk;
  SweepJoint joint = SweepJoint::kAny;
  /// Best first; failed cells last, by grid index.
  std::vector<SweepCell> ranked;
};

/// Evaluates the cells on up to `threads` workers (0 = hardware concurrency).
SweepResult sweep(const Scenario& base, const SweepGrid& grid, unsigned threads = 0);

void write_sweep_csv(const SweepResult& result, std::ostream& out);

}  // namespace armfatigue
