// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Reference values come from the oracles in oracles.hpp or from
// hand evaluation, never from the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "armfatigue/scenario.hpp"
#include "oracles.hpp"

using namespace armfatigue;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "[fail] ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

Scenario load(const char* name) { return load_scenario_file(std::string(ARMFATIGUE_SCENARIO_DIR) + "/" + name); }

Outcome kinematics() {
  Outcome o;
  const auto model = derive_anthropometry(1.88, 90.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double fk_ik = 0.0;
  for (ElbowBranch b : {ElbowBranch::kDown, ElbowBranch::kUp}) {
    const auto g = model.geometry(b);
    for (int i = 0; i < 10000; ++i) {
      const double r = g.inner_radius() + 1e-4 + (g.outer_radius() - g.inner_radius() - 2e-4) * unit(rng);
      const double a = 2 * kPi * unit(rng);
      const Vector2d p(r * std::cos(a), r * std::sin(a));
      fk_ik = std::max(fk_ik, (forward_kinematics(g, inverse_kinematics(g, p).theta).hand - p).norm());
    }
  }
  o.check(fk_ik < 1e-9, "FK(IK) max error " + fmt("%.2e", fk_ik) + " m");

  const auto g = model.geometry();
  double jac = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const Vector2d th(2 * kPi * unit(rng) - kPi, 2 * kPi * unit(rng) - kPi);
    Matrix2d fd;
    for (int c = 0; c < 2; ++c) {
      Vector2d tp = th, tm = th;
      tp[c] += h;
      tm[c] -= h;
      fd.col(c) = (forward_kinematics(g, tp).hand - forward_kinematics(g, tm).hand) / (2 * h);
    }
    const Matrix2d j = jacobian(g, th);
    jac = std::max(jac, (j - fd).norm() / j.norm());
  }
  o.check(jac < 1e-6, "Jacobian vs FD " + fmt("%.2e", jac));

  const TaskSetup s = build_task_setup(load("task1.json"));
  double ends = 0.0;
  for (Phase p : {Phase::kPush, Phase::kPull}) {
    const auto traj = joint_trajectory(g, s.leg(p), s.dt);
    for (const auto* st : {&traj.front(), &traj.back()}) {
      ends = std::max({ends, st->velocity.cwiseAbs().maxCoeff(), st->acceleration.cwiseAbs().maxCoeff()});
    }
  }
  o.check(ends < 1e-9, "endpoint rates " + fmt("%.2e", ends));
  return o;
}

Outcome dynamics() {
  Outcome o;
  auto m = derive_anthropometry(1.88, 90.0);
  m.tool_mass = 2.0;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-kPi, kPi);

  bool spd = true;
  for (int i = 0; i < 1000; ++i) {
    const Matrix2d mm = mass_matrix(m, Vector2d(ang(rng), ang(rng)));
    spd = spd && mm(0, 1) == mm(1, 0) && mm.llt().info() == Eigen::Success;
  }
  o.check(spd, "mass matrix SPD on 1000 postures");

  // d(T + V)/dt = theta_dot . tau along the Task 1 push leg.
  const double dt = 0.001;
  const auto traj = joint_trajectory(m.geometry(), TrajectoryLeg<double>{{0.4, 0.1}, {0.6, 0.1}, 5.0}, dt);
  auto energy = [&](const JointState<double>& s) { return kinetic_energy(m, s) + potential_energy(m, s.theta); };
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double de = (energy(traj[i + 1]) - energy(traj[i - 1])) / (2 * dt);
    const double power = traj[i].velocity.dot(inverse_dynamics(m, traj[i]));
    worst = std::max(worst, std::abs(de - power));
    scale = std::max(scale, std::abs(power));
  }
  o.check(worst / scale < 1e-4, "energy rate " + fmt("%.2e", worst / scale));

  const double oracle = oracles::straight_arm_moment(m);
  const double g = gravity_torque(m, Vector2d(kPi / 2, 0.0))[kShoulder];
  o.check(rel(g, oracle) < 1e-9 && std::abs(oracle - 33.12) < 0.01,
          "straight-arm gravity " + fmt("%.4f", g) + " vs " + fmt("%.4f", oracle) + " N m");
  return o;
}

Outcome capacity() {
  Outcome o;
  const auto t = CapacityCoefficients::chaffin();
  auto sig4 = [](double a, double b) { return rel(a, b) < 5e-5; };
  struct Case {
    Joint j;
    Movement m;
    double s, e, expected;
  };
  // Hand-evaluated (male).
  const Case cases[] = {
      {kShoulder, Movement::kExtension, 0, 0, 101.4014},
      {kShoulder, Movement::kFlexion, 60, 45, 66.55614},
      {kElbow, Movement::kFlexion, 30, 90, 74.87482},
      {kElbow, Movement::kExtension, 0, 0, 56.15893},
  };
  bool all = true;
  for (const auto& c : cases) all = all && sig4(joint_capacity(t, c.j, c.m, c.s, c.e, Gender::kMale), c.expected);
  o.check(all, "four rows to 4 significant figures");

  bool independent = true;
  for (double s = -30; s <= 180; s += 7.5) {
    for (double e = 0; e <= 150; e += 3.3) {
      independent = independent && joint_capacity(t, kShoulder, Movement::kExtension, s, e, Gender::kMale) ==
                                       joint_capacity(t, kShoulder, Movement::kExtension, s, 0.0, Gender::kMale);
    }
  }
  o.check(independent, "shoulder extension independent of theta_e");
  return o;
}

Outcome fatigue() {
  Outcome o;
  const TaskSetup s = build_task_setup(load("task1.json"));
  const CycleFatigue cf(s);
  const int cycles = 100;
  const auto trace = build_trace(cf, cycles * s.schedule.period());
  const auto naive = oracles::naive_group_capacity(s, cycles);
  double worst = naive.size() == trace.size() ? 0.0 : 1.0;
  for (std::size_t k = 0; k < std::min(naive.size(), trace.size()); ++k) {
    for (MuscleGroup g : kAllGroups) worst = std::max(worst, rel(at(trace.group_capacity[k], g), at(naive[k], g)));
  }
  o.check(worst < 1e-9, "fast-forward vs dense over 100 cycles " + fmt("%.2e", worst));

  // Constant ratio: held posture.
  TaskSetup held = s;
  held.pf = held.p0;
  const CycleFatigue hcf(held);
  const double horizon = 1200.0;
  const auto htrace = build_trace(hcf, horizon);
  double closed = 0.0;
  for (Phase p : {Phase::kPush, Phase::kPull}) {
    const PhaseSample& ps = hcf.profile(p).samples.front();
    for (int j = 0; j < 2; ++j) {
      const auto joint = static_cast<Joint>(j);
      const double rho = ps.demand[j] / ps.mvc[j];
      const double active = horizon / s.schedule.period() * s.schedule.duration(p);
      const double expected = ps.mvc[j] * std::exp(-s.k_per_second(joint) * rho * active);
      closed = std::max(closed, rel(at(htrace.group_capacity.back(), active_group(p, joint)), expected));
    }
  }
  o.check(closed < 1e-9, "constant-ratio closed form " + fmt("%.2e", closed));

  // Held posture in quasi-static mode equals the static law with C = Gamma_MVC(posture).
  MvcPolicy fixed;
  fixed.mode = MvcMode::kStaticFixed;
  for (MuscleGroup g : kAllGroups) {
    const Phase p = active_group(Phase::kPush, joint_of(g)) == g ? Phase::kPush : Phase::kPull;
    at(fixed.fixed_nm, g) = hcf.profile(p).samples.front().mvc[joint_of(g)];
  }
  const auto strace = build_trace(CycleFatigue(held, fixed), horizon);
  bool exact = strace.size() == htrace.size();
  for (std::size_t k = 0; exact && k < strace.size(); ++k) exact = strace.group_capacity[k] == htrace.group_capacity[k];
  o.check(exact, "static-posture reduction exact");
  return o;
}

struct Task1Runs {
  RiskCrossings quasi;
  RiskCrossings low;
  FatigueTrace quasi_trace;
  FatigueTrace low_trace;
  GroupValues increments{};
};

const Task1Runs& task1_runs() {
  static const Task1Runs runs = [] {
    Task1Runs r;
    const TaskSetup s = build_task_setup(load("task1.json"));
    const CycleFatigue q(s);
    const CycleFatigue lo(s, {MvcMode::kStaticMinOverCycle, {}});
    r.quasi = detect_risk_crossing(q, 3600.0);
    r.low = detect_risk_crossing(lo, 3600.0);
    r.quasi_trace = build_trace(q, 3600.0);
    r.low_trace = build_trace(lo, 3600.0);
    r.increments = q.increments();
    return r;
  }();
  return runs;
}

Outcome task1_reproduction() {
  Outcome o;
  const TaskSetup s = build_task_setup(load("task1.json"));
  const auto c = detect_risk_crossing(CycleFatigue(s), 3600.0);
  if (!c.joint[kElbow] || !c.joint[kShoulder]) {
    o.check(false, "a joint did not cross within 60 min");
    return o;
  }
  const double e = c.joint[kElbow]->time / 60.0;
  const double sh = c.joint[kShoulder]->time / 60.0;
  o.check(e < sh, "(a) elbow " + fmt("%.2f", e) + " min before shoulder " + fmt("%.2f", sh) + " min");
  o.check(e >= 10 && e <= 60 && sh >= 10 && sh <= 60, "(b) both in [10, 60] min");
  o.check(e >= 15 && e <= 40, "(c) elbow in [15, 40] min");
  return o;
}

Outcome static_vs_variable() {
  Outcome o;
  const auto& r = task1_runs();
  bool below = r.low_trace.size() == r.quasi_trace.size();
  for (std::size_t k = 0; below && k < r.low_trace.size(); ++k) {
    for (MuscleGroup g : kAllGroups) below = below && at(r.low_trace.group_capacity[k], g) <= at(r.quasi_trace.group_capacity[k], g);
  }
  o.check(below, "static_min Gamma_cem <= quasi-static pointwise");
  if (!r.quasi.joint[kElbow] || !r.low.joint[kElbow]) {
    o.check(false, "elbow crossing missing");
    return o;
  }
  const double lead = (r.quasi.joint[kElbow]->time - r.low.joint[kElbow]->time) / 60.0;
  o.check(lead >= 0.0 && lead <= 5.0, "elbow crossing " + fmt("%.2f", lead) + " min earlier");
  return o;
}

Outcome task2_contrast() {
  Outcome o;
  const double t1 = at(CycleFatigue(build_task_setup(load("task1.json"))).increments(), MuscleGroup::kElbowExtensor);
  const double t2 = at(CycleFatigue(build_task_setup(load("task2.json"))).increments(), MuscleGroup::kElbowExtensor);
  o.check(t2 < 0.2 * t1, "elbow push increment ratio " + fmt("%.1f", 100 * t2 / t1) + "% (< 20%)");

  const SweepGrid grid = load_grid_file(std::string(ARMFATIGUE_SCENARIO_DIR) + "/grid_task1_task2.json");
  // Same 60 min horizon as criterion 5, so both elbow crossings fall inside it.
  Scenario base = load("task1.json");
  base.run.duration_s = 3600.0;
  const SweepResult sr = sweep(base, grid);
  const bool ranked = sr.ranked.size() == 2 && sr.ranked[0].ok && sr.ranked[0].scenario.task.p0 == Vector2d(0.3, 0.1) &&
                      sr.ranked[0].objective > sr.ranked[1].objective;
  o.check(ranked, "sweep ranks Task 2 first on elbow time-to-risk (" +
                      (sr.ranked.size() == 2 ? fmt("%.1f", sr.ranked[0].objective / 60.0) + " vs " +
                                                   fmt("%.1f", sr.ranked[1].objective / 60.0) + " min"
                                             : std::string("?")) +
                      ")");
  return o;
}

Outcome push_vs_pull() {
  Outcome o;
  const auto& inc = task1_runs().increments;
  const double sf = at(inc, MuscleGroup::kShoulderFlexor), se = at(inc, MuscleGroup::kShoulderExtensor);
  const double ee = at(inc, MuscleGroup::kElbowExtensor), ef = at(inc, MuscleGroup::kElbowFlexor);
  o.check(sf > se, "shoulder push " + fmt("%.5f", sf) + " > pull " + fmt("%.5f", se));
  o.check(ee > ef, "elbow push " + fmt("%.5f", ee) + " > pull " + fmt("%.5f", ef));
  return o;
}

Outcome invariants() {
  Outcome o;
  const auto& t = task1_runs().quasi_trace;
  bool monotone = true, frozen = true, jumps_at_boundaries = true;
  double largest_inner_step = 0.0, largest_boundary_jump = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    const Phase p = t.phase[k - 1];
    for (MuscleGroup g : kAllGroups) {
      const double a = at(t.group_capacity[k - 1], g), b = at(t.group_capacity[k], g);
      monotone = monotone && b <= a;
      if (g != active_group(p, kShoulder) && g != active_group(p, kElbow)) frozen = frozen && a == b;
    }
    const bool boundary = t.phase[k] != p;
    for (int j = 0; j < 2; ++j) {
      const double step = std::abs(t.capacity[k][j] - t.capacity[k - 1][j]);
      if (boundary) {
        largest_boundary_jump = std::max(largest_boundary_jump, step);
      } else {
        largest_inner_step = std::max(largest_inner_step, step);
      }
    }
  }
  // Inside a phase the merged curve moves by at most the per-step decay of
  // one group; any discontinuity must sit on a phase boundary.
  jumps_at_boundaries = largest_inner_step < 1e-2 && largest_boundary_jump > 100 * largest_inner_step;
  o.check(monotone, "all groups non-increasing");
  o.check(frozen, "inactive groups constant");
  o.check(jumps_at_boundaries, "merged jumps only at phase boundaries (inner step " + fmt("%.1e", largest_inner_step) +
                                   ", boundary jump " + fmt("%.2f", largest_boundary_jump) + " N m)");
  return o;
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"1", "kinematics properties", 5.0, kinematics},
      {"2", "dynamics oracles", 5.0, dynamics},
      {"3", "capacity table", 0.0, capacity},
      {"4", "fatigue oracle equivalence", 10.0, fatigue},
      {"5", "task 1 reproduction", 5.0, task1_reproduction},
      {"6", "constant vs variable capacity", 0.0, static_vs_variable},
      {"7", "task 2 contrast", 0.0, task2_contrast},
      {"8", "push vs pull asymmetry", 0.0, push_vs_pull},
      {"9", "structural invariants", 0.0, invariants},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0) o.check(secs < c.budget_s, "runtime " + fmt("%.2f", secs) + " s < " + fmt("%.0f", c.budget_s) + " s");
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %s %-30s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
