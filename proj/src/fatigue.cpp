#include "armfatigue/fatigue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace armfatigue {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kOpposingFlagFraction = 0.05;

long long steps_for(double duration, double dt, const char* what) {
  const long long n = std::llround(duration / dt);
  if (n < 1 || std::abs(static_cast<double>(n) * dt - duration) > 1e-9) {
    std::ostringstream msg;
    msg << what << " " << duration << " s is not a positive multiple of dt = " << dt << " s";
    throw TimeOutOfRange(msg.str());
  }
  return n;
}

double group_capacity_at(const TaskSetup& setup, MuscleGroup g, const Vector2d& theta) {
  return joint_capacity(setup.capacity, joint_of(g), movement_of(g), theta[kShoulder] * kDegPerRad,
                        theta[kElbow] * kDegPerRad, setup.gender);
}

double direction_sign(MuscleGroup g) { return movement_of(g) == Movement::kFlexion ? 1.0 : -1.0; }

}  // namespace

PhaseClock phase_clock(const CycleSchedule& sched, double t) {
  if (t < sched.t0) {
    std::ostringstream msg;
    msg << "t = " << t << " s precedes work start t0 = " << sched.t0 << " s";
    throw NegativeTime(msg.str());
  }
  const double elapsed = t - sched.t0;
  const double period = sched.period();
  PhaseClock c;
  c.cycle = static_cast<long long>(std::floor(elapsed / period));
  c.offset = elapsed - static_cast<double>(c.cycle) * period;
  // Guard the floor against offsets rounding to a full period.
  if (c.offset >= period) {
    ++c.cycle;
    c.offset -= period;
  }
  const Phase first = sched.slot_phase(0);
  const Phase second = sched.slot_phase(1);
  const double first_len = sched.duration(first);
  const auto cycles = static_cast<double>(c.cycle);
  if (c.offset < first_len) {
    c.phase = first;
    c.active_time = elapsed - cycles * sched.duration(second);
  } else {
    c.phase = second;
    c.active_time = elapsed - (cycles + 1.0) * first_len;
  }
  return c;
}

TrajectoryLeg<double> TaskSetup::leg(Phase p) const {
  TrajectoryLeg<double> l;
  l.start = p == Phase::kPush ? p0 : pf;
  l.end = p == Phase::kPush ? pf : p0;
  l.duration = schedule.duration(p);
  l.blend = blend;
  return l;
}

std::vector<double> cumulative_exponent(std::span<const double> demand, std::span<const double> mvc,
                                        double k_per_second, double dt) {
  std::vector<double> out(demand.size(), 0.0);
  double prev_ratio = 0.0;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    if (!(mvc[i] > 0.0)) {
      std::ostringstream msg;
      msg << "joint capacity " << mvc[i] << " N m at sample " << i << " is not positive";
      throw ZeroCapacity(msg.str());
    }
    const double ratio = demand[i] / mvc[i];
    if (i > 0) out[i] = out[i - 1] + k_per_second * 0.5 * (prev_ratio + ratio) * dt;
    prev_ratio = ratio;
  }
  return out;
}

CycleFatigue::CycleFatigue(const TaskSetup& setup, const MvcPolicy& policy) : setup_(setup), policy_(policy) {
  const auto geom = setup_.geometry();
  const auto& sched = setup_.schedule;
  if (!(sched.t_push > 0.0 && sched.t_pull > 0.0)) throw TimeOutOfRange("phase durations must be positive");

  // Kinematics, torques and quasi-static capacities of both phases.
  bool non_positive = false;
  for (std::size_t s = 0; s < 2; ++s) {
    PhaseProfile& prof = slots_[s];
    prof.phase = sched.slot_phase(s);
    prof.steps = static_cast<std::size_t>(steps_for(sched.duration(prof.phase), setup_.dt, "phase duration"));
    const auto states = joint_trajectory(geom, setup_.leg(prof.phase), setup_.dt);
    const Vector2d force = hand_force(setup_.loads, prof.phase);
    prof.samples.reserve(states.size());
    for (const auto& st : states) {
      PhaseSample ps;
      ps.state = st;
      ps.torque = total_joint_torque(setup_.body, geom, st, force);
      ps.demand = ps.torque.cwiseAbs();
      ps.mvc = phase_capacity(setup_.capacity, prof.phase, st.theta, setup_.gender);
      non_positive = non_positive || phase_capacity_non_positive(setup_.capacity, prof.phase, st.theta, setup_.gender);
      prof.samples.push_back(ps);
    }
  }
  if (non_positive) {
    warnings_.push_back("NonPositiveCapacity: a capacity polynomial is <= 0 inside the task's posture range");
  }

  // Constant capacities for the static modes.
  if (policy_.mode != MvcMode::kQuasiStatic) {
    GroupValues constant{};
    for (MuscleGroup g : kAllGroups) {
      if (policy_.mode == MvcMode::kStaticFixed) {
        at(constant, g) = at(policy_.fixed_nm, g);
        continue;
      }
      const bool want_min = policy_.mode == MvcMode::kStaticMinOverCycle;
      double v = want_min ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      for (const auto& prof : slots_) {
        for (const auto& ps : prof.samples) {
          const double c = group_capacity_at(setup_, g, ps.state.theta);
          v = want_min ? std::min(v, c) : std::max(v, c);
        }
      }
      at(constant, g) = v;
    }
    for (auto& prof : slots_) {
      for (auto& ps : prof.samples) {
        for (int j : {kShoulder, kElbow}) {
          ps.mvc[j] = at(constant, active_group(prof.phase, static_cast<Joint>(j)));
        }
      }
    }
  }

  // Partial exponents and per-group constants.
  for (auto& prof : slots_) {
    const std::size_t n = prof.samples.size();
    for (int j : {kShoulder, kElbow}) {
      const auto joint = static_cast<Joint>(j);
      std::vector<double> demand(n), mvc(n);
      for (std::size_t i = 0; i < n; ++i) {
        demand[i] = prof.samples[i].demand[j];
        mvc[i] = prof.samples[i].mvc[j];
      }
      prof.partial_exponent[j] = cumulative_exponent(demand, mvc, setup_.k_per_second(joint), setup_.dt);

      const MuscleGroup g = active_group(prof.phase, joint);
      at(increments_, g) = prof.partial_exponent[j].back();
      at(initial_capacity_, g) = mvc.front();

      std::size_t opposing = 0;
      for (std::size_t i = 0; i < prof.steps; ++i) {
        if (prof.samples[i].torque[j] * direction_sign(g) < 0.0) ++opposing;
      }
      at(opposing_fraction_, g) = static_cast<double>(opposing) / static_cast<double>(prof.steps);
      if (at(opposing_fraction_, g) > kOpposingFlagFraction) {
        std::ostringstream msg;
        msg << "DemandSignMismatch: " << group_name(g) << " net torque opposes its action on "
            << 100.0 * at(opposing_fraction_, g) << "% of the phase";
        warnings_.push_back(msg.str());
      }
    }
  }
}

double CycleFatigue::exponent(MuscleGroup group, long long cycle, std::size_t slot, std::size_t index) const {
  const Phase own = active_group(slots_[0].phase, joint_of(group)) == group ? slots_[0].phase : slots_[1].phase;
  const std::size_t own_slot = setup_.schedule.slot_of(own);
  const double inc = at(increments_, group);
  const auto c = static_cast<double>(cycle);
  if (own_slot == slot) return c * inc + slots_[slot].partial_exponent[joint_of(group)][index];
  if (own_slot < slot) return (c + 1.0) * inc;
  return c * inc;
}

double CycleFatigue::capacity(MuscleGroup group, long long cycle, std::size_t slot, std::size_t index) const {
  return at(initial_capacity_, group) * std::exp(-exponent(group, cycle, slot, index));
}

CycleFatigue::GridPoint CycleFatigue::grid_point(long long k) const {
  const auto per = static_cast<long long>(samples_per_cycle());
  const auto first = static_cast<long long>(slots_[0].steps);
  GridPoint p{k / per, 0, 0};
  const long long m = k % per;
  if (m < first) {
    p.index = static_cast<std::size_t>(m);
  } else {
    p.slot = 1;
    p.index = static_cast<std::size_t>(m - first);
  }
  return p;
}

GroupValues cycle_exponent_increments(const CycleFatigue& cf) { return cf.increments(); }

GroupValues fatigue_at(const CycleFatigue& cf, double t) {
  const auto& setup = cf.setup();
  const PhaseClock clock = phase_clock(setup.schedule, t);
  const std::size_t slot = setup.schedule.slot_of(clock.phase);
  const double local = slot == 0 ? clock.offset : clock.offset - setup.schedule.duration(setup.schedule.slot_phase(0));
  const PhaseProfile& prof = cf.slot(slot);

  // Position between grid samples; snap to the grid within round-off.
  double pos = std::clamp(local / setup.dt, 0.0, static_cast<double>(prof.steps));
  if (std::abs(pos - std::round(pos)) < 1e-9) pos = std::round(pos);
  const auto lo = std::min(static_cast<std::size_t>(std::floor(pos)), prof.steps);
  const std::size_t hi = std::min(lo + 1, prof.steps);
  const double w = pos - static_cast<double>(lo);

  GroupValues out{};
  for (MuscleGroup g : kAllGroups) {
    const double e_lo = cf.exponent(g, clock.cycle, slot, lo);
    const double e_hi = cf.exponent(g, clock.cycle, slot, hi);
    at(out, g) = at(cf.initial_capacity(), g) * std::exp(-((1.0 - w) * e_lo + w * e_hi));
  }
  return out;
}

FatigueTrace build_trace(const CycleFatigue& cf, double duration) {
  FatigueTrace trace;
  trace.initial_capacity = cf.initial_capacity();
  if (duration <= 0.0) return trace;
  const auto& setup = cf.setup();
  const long long n = steps_for(duration, setup.dt, "duration");
  const auto count = static_cast<std::size_t>(n) + 1;
  trace.time.reserve(count);
  trace.phase.reserve(count);
  trace.theta.reserve(count);
  trace.torque.reserve(count);
  trace.demand.reserve(count);
  trace.mvc.reserve(count);
  trace.capacity.reserve(count);
  trace.group_capacity.reserve(count);

  for (long long k = 0; k <= n; ++k) {
    const auto gp = cf.grid_point(k);
    const PhaseProfile& prof = cf.slot(gp.slot);
    const PhaseSample& ps = prof.samples[gp.index];
    GroupValues groups{};
    for (MuscleGroup g : kAllGroups) at(groups, g) = cf.capacity(g, gp.cycle, gp.slot, gp.index);
    trace.time.push_back(setup.schedule.t0 + static_cast<double>(k) * setup.dt);
    trace.phase.push_back(prof.phase);
    trace.theta.push_back(ps.state.theta);
    trace.torque.push_back(ps.torque);
    trace.demand.push_back(ps.demand);
    trace.mvc.push_back(ps.mvc);
    trace.capacity.emplace_back(at(groups, active_group(prof.phase, kShoulder)),
                                at(groups, active_group(prof.phase, kElbow)));
    trace.group_capacity.push_back(groups);
  }
  return trace;
}

FatigueTrace simulate(const TaskSetup& setup, double duration) {
  return build_trace(CycleFatigue(setup), duration);
}

FatigueTrace simulate_static_mode(const TaskSetup& setup, double duration, const MvcPolicy& policy) {
  return build_trace(CycleFatigue(setup, policy), duration);
}

RiskCrossings detect_risk_crossing(const CycleFatigue& cf, double horizon) {
  RiskCrossings out;
  const auto& setup = cf.setup();
  if (horizon < 0.0) return out;
  const long long last = std::llround(std::floor(horizon / setup.dt + 1e-9));
  const auto per = static_cast<long long>(cf.samples_per_cycle());

  for (int j : {kShoulder, kElbow}) {
    long long best = std::numeric_limits<long long>::max();
    MuscleGroup best_group = MuscleGroup::kShoulderFlexor;
    for (std::size_t s = 0; s < 2; ++s) {
      const PhaseProfile& prof = cf.slot(s);
      const MuscleGroup g = active_group(prof.phase, static_cast<Joint>(j));
      const double c0 = at(cf.initial_capacity(), g);
      const double inc = at(cf.increments(), g);
      const long long slot_offset = s == 0 ? 0 : static_cast<long long>(cf.slot(0).steps);
      for (std::size_t i = 0; i < prof.steps; ++i) {
        const double d = prof.samples[i].demand[j];
        if (!(d > 0.0)) continue;
        auto crossed = [&](long long cycle) { return cf.capacity(g, cycle, s, i) <= d; };
        long long cycle = 0;
        if (!crossed(0)) {
          if (!(inc > 0.0)) continue;
          const double need = (std::log(c0 / d) - prof.partial_exponent[j][i]) / inc;
          if (!(need < static_cast<double>(last / per + 2))) continue;
          cycle = std::max(0LL, static_cast<long long>(std::ceil(need)));
          while (!crossed(cycle)) ++cycle;
          while (cycle > 0 && crossed(cycle - 1)) --cycle;
        }
        const long long k = cycle * per + slot_offset + static_cast<long long>(i);
        if (k <= last && k < best) {
          best = k;
          best_group = g;
        }
      }
    }
    if (best != std::numeric_limits<long long>::max()) {
      out.joint[j] = RiskCrossing{setup.schedule.t0 + static_cast<double>(best) * setup.dt, best_group};
    }
  }
  return out;
}

RiskCrossings detect_risk_crossing(const FatigueTrace& trace) {
  RiskCrossings out;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    for (int j : {kShoulder, kElbow}) {
      if (out.joint[j]) continue;
      if (trace.demand[k][j] > 0.0 && trace.capacity[k][j] <= trace.demand[k][j]) {
        out.joint[j] = RiskCrossing{trace.time[k], active_group(trace.phase[k], static_cast<Joint>(j))};
      }
    }
    if (out.joint[0] && out.joint[1]) break;
  }
  return out;
}

}  // namespace armfatigue
