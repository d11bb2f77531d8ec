#include "armfatigue/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace armfatigue {

using nlohmann::json;

namespace {

// Tracks which keys of an object were read so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw SchemaError(child(key), "missing required key");
    return *it;
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw SchemaError(child(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(child(key), "must be finite");
    return d;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw SchemaError(child(key), "expected a string");
    return v.get<std::string>();
  }

  Vector2d point(const std::string& key) {
    const json& v = get(key);
    return parse_point(v, child(key));
  }

  static Vector2d parse_point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw SchemaError(path, "expected [x, z] in metres");
    }
    Vector2d p(v[0].get<double>(), v[1].get<double>());
    if (!p.allFinite()) throw ValidationError(path, "must be finite");
    return p;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw SchemaError(child(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& value, const std::string& path,
                const std::array<std::pair<const char*, Enum>, N>& table) {
  for (const auto& [name, e] : table) {
    if (value == name) return e;
  }
  std::string allowed;
  for (const auto& entry : table) allowed += std::string(allowed.empty() ? "" : "|") + entry.first;
  throw ValidationError(path, "'" + value + "' is not one of " + allowed);
}

template <typename Enum, std::size_t N>
const char* enum_name(Enum e, const std::array<std::pair<const char*, Enum>, N>& table) {
  for (const auto& [name, v] : table) {
    if (v == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<const char*, Gender>, 2> kGenders{{{"male", Gender::kMale}, {"female", Gender::kFemale}}};
constexpr std::array<std::pair<const char*, MvcMode>, 4> kModes{{{"quasistatic", MvcMode::kQuasiStatic},
                                                                 {"static_min_mvc", MvcMode::kStaticMinOverCycle},
                                                                 {"static_max_mvc", MvcMode::kStaticMaxOverCycle},
                                                                 {"static_fixed", MvcMode::kStaticFixed}}};
constexpr std::array<std::pair<const char*, ElbowBranch>, 2> kBranches{
    {{"elbow_down", ElbowBranch::kDown}, {"elbow_up", ElbowBranch::kUp}}};
constexpr std::array<std::pair<const char*, ForceConvention>, 2> kConventions{
    {{"exerted_by_hand", ForceConvention::kExertedByHand}, {"reaction_on_hand", ForceConvention::kReactionOnHand}}};
constexpr std::array<std::pair<const char*, BlendProfile>, 2> kBlends{
    {{"cubic", BlendProfile::kCubic}, {"quintic", BlendProfile::kQuintic}}};
constexpr std::array<std::pair<const char*, Phase>, 2> kPhases{{{"push", Phase::kPush}, {"pull", Phase::kPull}}};
constexpr std::array<std::pair<const char*, SweepObjective>, 2> kObjectives{
    {{"max_time_to_risk", SweepObjective::kMaxTimeToRisk}, {"min_total_exponent", SweepObjective::kMinTotalExponent}}};
constexpr std::array<std::pair<const char*, SweepJoint>, 3> kSweepJoints{
    {{"any", SweepJoint::kAny}, {"shoulder", SweepJoint::kShoulder}, {"elbow", SweepJoint::kElbow}}};

constexpr std::array<std::pair<const char*, Movement>, 2> kMovementKeys{
    {{"flexion", Movement::kFlexion}, {"extension", Movement::kExtension}}};

const char* capacity_key(Joint j, Movement m) {
  if (j == kElbow) return m == Movement::kFlexion ? "elbow_flexion" : "elbow_extension";
  return m == Movement::kFlexion ? "shoulder_flexion" : "shoulder_extension";
}

SegmentOverride parse_segment(const json& v, const std::string& path) {
  ObjectReader r(v, path);
  SegmentOverride s;
  s.length_m = r.optional_number("length_m");
  s.mass_kg = r.optional_number("mass_kg");
  s.com_m = r.optional_number("com_m");
  s.inertia_kgm2 = r.optional_number("inertia_kgm2");
  r.finish();
  return s;
}

json segment_json(const SegmentOverride& s) {
  json j = json::object();
  if (s.length_m) j["length_m"] = *s.length_m;
  if (s.mass_kg) j["mass_kg"] = *s.mass_kg;
  if (s.com_m) j["com_m"] = *s.com_m;
  if (s.inertia_kgm2) j["inertia_kgm2"] = *s.inertia_kgm2;
  return j;
}

CapacityCoefficients parse_capacity(const json& v, const std::string& path) {
  ObjectReader r(v, path);
  CapacityCoefficients c = CapacityCoefficients::chaffin();
  for (Joint j : {kElbow, kShoulder}) {
    for (const auto& [mname, m] : kMovementKeys) {
      (void)mname;
      const char* key = capacity_key(j, m);
      if (!r.has(key)) continue;
      ObjectReader row(r.get(key), r.child(key));
      CapacityRow& out = c.row(j, m);
      out.constant = row.number_or("constant", out.constant);
      out.theta_e = row.number_or("theta_e", out.theta_e);
      out.theta_e_sq = row.number_or("theta_e_sq", out.theta_e_sq);
      out.theta_s = row.number_or("theta_s", out.theta_s);
      out.gain_male = row.number_or("gain_male", out.gain_male);
      out.gain_female = row.number_or("gain_female", out.gain_female);
      row.finish();
    }
  }
  r.finish();
  return c;
}

json capacity_json(const CapacityCoefficients& c) {
  json j = json::object();
  for (Joint jt : {kElbow, kShoulder}) {
    for (const auto& [mname, m] : kMovementKeys) {
      (void)mname;
      const CapacityRow& r = c.row(jt, m);
      j[capacity_key(jt, m)] = {{"constant", r.constant},   {"theta_e", r.theta_e},
                                {"theta_e_sq", r.theta_e_sq}, {"theta_s", r.theta_s},
                                {"gain_male", r.gain_male}, {"gain_female", r.gain_female}};
    }
  }
  return j;
}

GroupValues parse_groups(const json& v, const std::string& path) {
  ObjectReader r(v, path);
  GroupValues g{};
  for (MuscleGroup mg : kAllGroups) at(g, mg) = r.number(group_name(mg));
  r.finish();
  return g;
}

json groups_json(const GroupValues& g) {
  json j = json::object();
  for (MuscleGroup mg : kAllGroups) j[group_name(mg)] = at(g, mg);
  return j;
}

json point_json(const Vector2d& p) { return json::array({p[0], p[1]}); }

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_multiple(double value, double step) {
  const double n = std::round(value / step);
  return n >= 1.0 && std::abs(n * step - value) <= 1e-9;
}

void apply_override(SegmentParams<double>& s, const SegmentOverride& o) {
  if (o.length_m) s.length = *o.length_m;
  if (o.mass_kg) s.mass = *o.mass_kg;
  if (o.com_m) s.com_distance = *o.com_m;
  if (o.inertia_kgm2) s.inertia_com = *o.inertia_kgm2;
}

void validate_segment(const SegmentParams<double>& s, const std::string& path) {
  if (!(s.length > 0.0)) throw ValidationError(path + ".length_m", "must be > 0");
  if (!(s.mass > 0.0)) throw ValidationError(path + ".mass_kg", "must be > 0");
  if (!(s.com_distance > 0.0 && s.com_distance <= s.length)) {
    throw ValidationError(path + ".com_m", "must be in (0, length]");
  }
  if (!(s.inertia_com > 0.0)) throw ValidationError(path + ".inertia_kgm2", "must be > 0");
}

// Shortest decimal that parses back to the same double.
void put_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

const char* mode_name(MvcMode m) { return enum_name(m, kModes); }
const char* phase_name(Phase p) { return enum_name(p, kPhases); }

// Loading ----------------------------------------------------------------------

Scenario load_scenario(std::string_view text) {
  const json root = parse_json(text);
  ObjectReader r(root, "");
  Scenario s;

  {
    ObjectReader o(r.get("operator"), "operator");
    s.op.stature_m = o.number("stature_m");
    s.op.body_mass_kg = o.number("body_mass_kg");
    if (o.has("gender")) s.op.gender = parse_enum(o.string("gender"), o.child("gender"), kGenders);
    s.op.k_shoulder_per_min = o.number_or("k_shoulder_per_min", s.op.k_shoulder_per_min);
    s.op.k_elbow_per_min = o.number_or("k_elbow_per_min", s.op.k_elbow_per_min);
    if (o.has("segments")) {
      ObjectReader seg(o.get("segments"), o.child("segments"));
      if (seg.has("upper_arm")) s.op.upper_arm = parse_segment(seg.get("upper_arm"), seg.child("upper_arm"));
      if (seg.has("forearm_hand")) {
        s.op.forearm_hand = parse_segment(seg.get("forearm_hand"), seg.child("forearm_hand"));
      }
      seg.finish();
    }
    if (o.has("capacity_coefficients")) {
      s.op.capacity_coefficients =
          parse_capacity(o.get("capacity_coefficients"), o.child("capacity_coefficients"));
    }
    o.finish();
  }
  {
    ObjectReader t(r.get("task"), "task");
    s.task.p0 = t.point("p0_m");
    s.task.pf = t.point("pf_m");
    s.task.t_push_s = t.number("t_push_s");
    s.task.t_pull_s = t.number("t_pull_s");
    s.task.push_force_n = t.number("push_force_n");
    s.task.pull_force_n = t.number("pull_force_n");
    s.task.tool_mass_kg = t.number_or("tool_mass_kg", 0.0);
    if (t.has("force_convention")) {
      s.task.force_convention = parse_enum(t.string("force_convention"), t.child("force_convention"), kConventions);
    }
    if (t.has("blend")) s.task.blend = parse_enum(t.string("blend"), t.child("blend"), kBlends);
    if (t.has("starts_with")) s.task.starts_with = parse_enum(t.string("starts_with"), t.child("starts_with"), kPhases);
    t.finish();
  }
  {
    ObjectReader u(r.get("run"), "run");
    s.run.duration_s = u.number("duration_s");
    s.run.dt_s = u.number_or("dt_s", s.run.dt_s);
    if (u.has("mode")) s.run.mode = parse_enum(u.string("mode"), u.child("mode"), kModes);
    if (u.has("elbow_branch")) {
      s.run.elbow_branch = parse_enum(u.string("elbow_branch"), u.child("elbow_branch"), kBranches);
    }
    if (u.has("fixed_mvc_nm")) s.run.fixed_mvc_nm = parse_groups(u.get("fixed_mvc_nm"), u.child("fixed_mvc_nm"));
    s.run.gravity_mps2 = u.number_or("gravity_mps2", s.run.gravity_mps2);
    u.finish();
  }
  r.finish();

  validate_scenario(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) { return load_scenario(read_file(path)); }

std::string serialize_scenario(const Scenario& s) {
  json op = {{"stature_m", s.op.stature_m},
             {"body_mass_kg", s.op.body_mass_kg},
             {"gender", enum_name(s.op.gender, kGenders)},
             {"k_shoulder_per_min", s.op.k_shoulder_per_min},
             {"k_elbow_per_min", s.op.k_elbow_per_min}};
  if (!s.op.upper_arm.empty() || !s.op.forearm_hand.empty()) {
    json seg = json::object();
    if (!s.op.upper_arm.empty()) seg["upper_arm"] = segment_json(s.op.upper_arm);
    if (!s.op.forearm_hand.empty()) seg["forearm_hand"] = segment_json(s.op.forearm_hand);
    op["segments"] = seg;
  }
  if (s.op.capacity_coefficients) op["capacity_coefficients"] = capacity_json(*s.op.capacity_coefficients);

  json task = {{"p0_m", point_json(s.task.p0)},
               {"pf_m", point_json(s.task.pf)},
               {"t_push_s", s.task.t_push_s},
               {"t_pull_s", s.task.t_pull_s},
               {"push_force_n", s.task.push_force_n},
               {"pull_force_n", s.task.pull_force_n},
               {"tool_mass_kg", s.task.tool_mass_kg},
               {"force_convention", enum_name(s.task.force_convention, kConventions)},
               {"blend", enum_name(s.task.blend, kBlends)},
               {"starts_with", enum_name(s.task.starts_with, kPhases)}};

  json run = {{"duration_s", s.run.duration_s},
              {"dt_s", s.run.dt_s},
              {"mode", enum_name(s.run.mode, kModes)},
              {"elbow_branch", enum_name(s.run.elbow_branch, kBranches)},
              {"gravity_mps2", s.run.gravity_mps2}};
  if (s.run.fixed_mvc_nm) run["fixed_mvc_nm"] = groups_json(*s.run.fixed_mvc_nm);

  return json{{"operator", op}, {"task", task}, {"run", run}}.dump(2) + "\n";
}

ArmInertialModel<double> build_body(const Scenario& s) {
  ArmInertialModel<double> body;
  try {
    body = derive_anthropometry(s.op.stature_m, s.op.body_mass_kg);
  } catch (const OutOfRangeAnthropometry& e) {
    throw ValidationError("operator", e.what());
  }
  apply_override(body.upper_arm, s.op.upper_arm);
  apply_override(body.forearm_hand, s.op.forearm_hand);
  body.tool_mass = s.task.tool_mass_kg;
  body.gravity = s.run.gravity_mps2;
  return body;
}

void validate_scenario(const Scenario& s) {
  const auto body = build_body(s);
  validate_segment(body.upper_arm, "operator.segments.upper_arm");
  validate_segment(body.forearm_hand, "operator.segments.forearm_hand");
  if (!(s.op.k_shoulder_per_min >= 0.0)) throw ValidationError("operator.k_shoulder_per_min", "must be >= 0");
  if (!(s.op.k_elbow_per_min >= 0.0)) throw ValidationError("operator.k_elbow_per_min", "must be >= 0");
  if (s.op.capacity_coefficients) {
    for (Joint j : {kElbow, kShoulder}) {
      for (const auto& [mname, m] : kMovementKeys) {
        (void)mname;
        const CapacityRow& r = s.op.capacity_coefficients->row(j, m);
        if (!(r.gain_male > 0.0 && r.gain_female > 0.0)) {
          throw ValidationError(std::string("operator.capacity_coefficients.") + capacity_key(j, m), "gains must be > 0");
        }
      }
    }
  }

  if (!(s.run.dt_s > 0.0)) throw ValidationError("run.dt_s", "must be > 0");
  if (!(s.task.t_push_s > 0.0) || !is_multiple(s.task.t_push_s, s.run.dt_s)) {
    throw ValidationError("task.t_push_s", "must be a positive multiple of run.dt_s");
  }
  if (!(s.task.t_pull_s > 0.0) || !is_multiple(s.task.t_pull_s, s.run.dt_s)) {
    throw ValidationError("task.t_pull_s", "must be a positive multiple of run.dt_s");
  }
  if (!(s.task.push_force_n >= 0.0)) throw ValidationError("task.push_force_n", "must be >= 0");
  if (!(s.task.pull_force_n >= 0.0)) throw ValidationError("task.pull_force_n", "must be >= 0");
  if (!(s.task.tool_mass_kg >= 0.0)) throw ValidationError("task.tool_mass_kg", "must be >= 0");
  if (!(s.run.gravity_mps2 >= 0.0)) throw ValidationError("run.gravity_mps2", "must be >= 0");

  const double period = s.task.t_push_s + s.task.t_pull_s;
  if (!(s.run.duration_s >= period - 1e-9) || !is_multiple(s.run.duration_s, s.run.dt_s)) {
    throw ValidationError("run.duration_s", "must be >= one cycle and a multiple of run.dt_s");
  }
  if (s.run.mode == MvcMode::kStaticFixed) {
    if (!s.run.fixed_mvc_nm) throw ValidationError("run.fixed_mvc_nm", "required when run.mode is static_fixed");
    for (MuscleGroup g : kAllGroups) {
      if (!(at(*s.run.fixed_mvc_nm, g) > 0.0)) {
        throw ValidationError(std::string("run.fixed_mvc_nm.") + group_name(g), "must be > 0");
      }
    }
  }

  // The straight hand path must stay inside the annulus with margin.
  const auto geom = body.geometry(s.run.elbow_branch);
  const double inner = geom.inner_radius() + kEndpointMargin;
  const double outer = geom.outer_radius() - kEndpointMargin;
  for (const auto& [key, p] : {std::pair<const char*, Vector2d>{"task.p0_m", s.task.p0}, {"task.pf_m", s.task.pf}}) {
    const double r = p.norm();
    if (!(r >= inner && r <= outer)) {
      std::ostringstream msg;
      msg << "unreachable endpoint: distance " << r << " m from the shoulder is outside [" << inner << ", " << outer
          << "]";
      throw ValidationError(key, msg.str());
    }
  }
  const Vector2d d = s.task.pf - s.task.p0;
  const double len2 = d.squaredNorm();
  const double u = len2 > 0.0 ? std::clamp(-s.task.p0.dot(d) / len2, 0.0, 1.0) : 0.0;
  if ((s.task.p0 + u * d).norm() < inner) {
    throw ValidationError("task", "hand path passes too close to the shoulder to be reachable");
  }
}

TaskSetup build_task_setup(const Scenario& s) {
  TaskSetup t;
  t.body = build_body(s);
  t.branch = s.run.elbow_branch;
  t.capacity = s.op.capacity_coefficients.value_or(CapacityCoefficients::chaffin());
  t.gender = s.op.gender;
  t.loads = {s.task.push_force_n, s.task.pull_force_n, s.task.force_convention};
  t.p0 = s.task.p0;
  t.pf = s.task.pf;
  t.blend = s.task.blend;
  t.schedule = {s.task.t_push_s, s.task.t_pull_s, 0.0, s.task.starts_with};
  t.k_shoulder_per_min = s.op.k_shoulder_per_min;
  t.k_elbow_per_min = s.op.k_elbow_per_min;
  t.dt = s.run.dt_s;
  return t;
}

MvcPolicy build_policy(const Scenario& s) {
  MvcPolicy p;
  p.mode = s.run.mode;
  if (s.run.fixed_mvc_nm) p.fixed_nm = *s.run.fixed_mvc_nm;
  return p;
}

// Running ----------------------------------------------------------------------

RunResult run(const Scenario& s, bool keep_trace) {
  const CycleFatigue cf(build_task_setup(s), build_policy(s));
  RunResult out;
  if (keep_trace) out.trace = build_trace(cf, s.run.duration_s);
  RunSummary& sum = out.summary;
  sum.mode = s.run.mode;
  sum.duration_s = s.run.duration_s;
  sum.crossings = detect_risk_crossing(cf, s.run.duration_s);
  sum.initial_capacity = cf.initial_capacity();
  sum.final_capacity = fatigue_at(cf, s.run.duration_s);
  sum.cycle_increments = cf.increments();
  sum.warnings = cf.warnings();
  return out;
}

std::string summary_json(const RunSummary& summary) {
  json crossings = json::object();
  for (Joint j : {kShoulder, kElbow}) {
    const char* name = j == kShoulder ? "shoulder" : "elbow";
    const auto& c = summary.crossings.joint[j];
    if (c) {
      crossings[name] = {{"time_s", c->time}, {"time_min", c->time / 60.0}, {"group", group_name(c->group)}};
    } else {
      crossings[name] = nullptr;
    }
  }
  json j = {{"mode", mode_name(summary.mode)},
            {"duration_s", summary.duration_s},
            {"risk_crossing", crossings},
            {"initial_gamma_cem_nm", groups_json(summary.initial_capacity)},
            {"final_gamma_cem_nm", groups_json(summary.final_capacity)},
            {"cycle_exponent_increment", groups_json(summary.cycle_increments)},
            {"warnings", summary.warnings}};
  return j.dump(2) + "\n";
}

void write_trace_csv(const FatigueTrace& trace, std::ostream& out) {
  std::string buf;
  buf.reserve(256);
  out << kTraceHeader << '\n';
  for (std::size_t k = 0; k < trace.size(); ++k) {
    buf.clear();
    put_number(buf, trace.time[k]);
    buf += ',';
    buf += phase_name(trace.phase[k]);
    for (double v : {trace.theta[k][0], trace.theta[k][1], trace.demand[k][0], trace.demand[k][1], trace.mvc[k][0],
                     trace.mvc[k][1], trace.capacity[k][0], trace.capacity[k][1]}) {
      buf += ',';
      put_number(buf, v);
    }
    for (double v : trace.group_capacity[k]) {
      buf += ',';
      put_number(buf, v);
    }
    buf += '\n';
    out << buf;
  }
}

void write_trace_csv(const FatigueTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_trace_csv(trace, out);
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

// Sweep ------------------------------------------------------------------------

SweepGrid load_grid(std::string_view text) {
  const json root = parse_json(text);
  ObjectReader r(root, "");
  SweepGrid g;
  auto numbers = [&](const char* key, std::vector<double>& out) {
    if (!r.has(key)) return;
    const json& v = r.get(key);
    if (!v.is_array() || v.empty()) throw SchemaError(r.child(key), "expected a non-empty array of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw SchemaError(r.child(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
  };
  auto points = [&](const char* key, std::vector<Vector2d>& out) {
    if (!r.has(key)) return;
    const json& v = r.get(key);
    if (!v.is_array() || v.empty()) throw SchemaError(r.child(key), "expected a non-empty array of points");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(ObjectReader::parse_point(v[i], r.child(key) + "[" + std::to_string(i) + "]"));
    }
  };
  if (r.has("endpoints")) {
    const json& v = r.get("endpoints");
    if (!v.is_array() || v.empty()) throw SchemaError("endpoints", "expected a non-empty array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      ObjectReader e(v[i], "endpoints[" + std::to_string(i) + "]");
      g.endpoints.push_back({e.point("p0_m"), e.point("pf_m")});
      e.finish();
    }
  }
  points("p0_m", g.p0);
  points("pf_m", g.pf);
  if (!g.endpoints.empty() && (!g.p0.empty() || !g.pf.empty())) {
    throw SchemaError("endpoints", "cannot be combined with p0_m / pf_m axes");
  }
  numbers("push_force_n", g.push_force_n);
  numbers("pull_force_n", g.pull_force_n);
  numbers("t_push_s", g.t_push_s);
  numbers("t_pull_s", g.t_pull_s);
  if (r.has("objective")) g.objective = parse_enum(r.string("objective"), "objective", kObjectives);
  if (r.has("joint")) g.joint = parse_enum(r.string("joint"), "joint", kSweepJoints);
  r.finish();
  return g;
}

SweepGrid load_grid_file(const std::string& path) { return load_grid(read_file(path)); }

std::vector<Scenario> expand_grid(const Scenario& base, const SweepGrid& grid) {
  std::vector<Endpoints> ends = grid.endpoints;
  if (ends.empty()) {
    const std::vector<Vector2d> p0s = grid.p0.empty() ? std::vector<Vector2d>{base.task.p0} : grid.p0;
    const std::vector<Vector2d> pfs = grid.pf.empty() ? std::vector<Vector2d>{base.task.pf} : grid.pf;
    for (const auto& a : p0s) {
      for (const auto& b : pfs) ends.push_back({a, b});
    }
  }
  auto axis = [](const std::vector<double>& v, double fallback) { return v.empty() ? std::vector<double>{fallback} : v; };
  const auto push = axis(grid.push_force_n, base.task.push_force_n);
  const auto pull = axis(grid.pull_force_n, base.task.pull_force_n);
  const auto tpush = axis(grid.t_push_s, base.task.t_push_s);
  const auto tpull = axis(grid.t_pull_s, base.task.t_pull_s);

  std::vector<Scenario> out;
  for (const auto& e : ends) {
    for (double fpush : push) {
      for (double fpull : pull) {
        for (double a : tpush) {
          for (double b : tpull) {
            Scenario s = base;
            s.task.p0 = e.p0;
            s.task.pf = e.pf;
            s.task.push_force_n = fpush;
            s.task.pull_force_n = fpull;
            s.task.t_push_s = a;
            s.task.t_pull_s = b;
            out.push_back(s);
          }
        }
      }
    }
  }
  return out;
}

namespace {

void score(SweepCell& cell, SweepObjective objective, SweepJoint joint) {
  const RunSummary& sum = cell.summary;
  auto joint_selected = [&](Joint j) {
    return joint == SweepJoint::kAny || (joint == SweepJoint::kShoulder) == (j == kShoulder);
  };
  double crossing = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (Joint j : {kShoulder, kElbow}) {
    if (!joint_selected(j)) continue;
    if (sum.crossings.joint[j]) crossing = std::min(crossing, sum.crossings.joint[j]->time);
  }
  for (MuscleGroup g : kAllGroups) {
    if (!joint_selected(joint_of(g))) continue;
    total += std::log(at(sum.initial_capacity, g) / at(sum.final_capacity, g));
  }
  cell.total_exponent = total;
  cell.objective = objective == SweepObjective::kMaxTimeToRisk ? crossing : total;
}

}  // namespace

SweepResult sweep(const Scenario& base, const SweepGrid& grid, unsigned threads) {
  const std::vector<Scenario> scenarios = expand_grid(base, grid);
  std::vector<SweepCell> cells(scenarios.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      SweepCell& cell = cells[i];
      cell.index = i;
      cell.scenario = scenarios[i];
      try {
        validate_scenario(cell.scenario);
        cell.summary = run(cell.scenario, false).summary;
        score(cell, grid.objective, grid.joint);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const bool maximize = grid.objective == SweepObjective::kMaxTimeToRisk;
  std::stable_sort(cells.begin(), cells.end(), [&](const SweepCell& a, const SweepCell& b) {
    if (a.ok != b.ok) return a.ok;
    if (!a.ok) return a.index < b.index;
    if (a.objective != b.objective) return maximize ? a.objective > b.objective : a.objective < b.objective;
    if (a.total_exponent != b.total_exponent) return a.total_exponent < b.total_exponent;
    return a.index < b.index;
  });
  return {grid.objective, grid.joint, std::move(cells)};
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "rank,cell,status,p0_x_m,p0_z_m,pf_x_m,pf_z_m,push_force_n,pull_force_n,t_push_s,t_pull_s,"
         "objective,crossing_shoulder_s,crossing_elbow_s,total_exponent,error\n";
  std::string buf;
  for (std::size_t r = 0; r < result.ranked.size(); ++r) {
    const SweepCell& c = result.ranked[r];
    const TaskSpec& t = c.scenario.task;
    buf.clear();
    buf += std::to_string(r + 1) + "," + std::to_string(c.index) + "," + (c.ok ? "ok" : "failed");
    for (double v : {t.p0[0], t.p0[1], t.pf[0], t.pf[1], t.push_force_n, t.pull_force_n, t.t_push_s, t.t_pull_s}) {
      buf += ',';
      put_number(buf, v);
    }
    buf += ',';
    if (c.ok) {
      if (std::isinf(c.objective)) {
        buf += "inf";
      } else {
        put_number(buf, c.objective);
      }
    }
    for (Joint j : {kShoulder, kElbow}) {
      buf += ',';
      if (c.ok && c.summary.crossings.joint[j]) put_number(buf, c.summary.crossings.joint[j]->time);
    }
    buf += ',';
    if (c.ok) put_number(buf, c.total_exponent);
    buf += ',';
    if (!c.ok) {
      std::string e = c.error;
      std::replace(e.begin(), e.end(), '"', '\'');
      buf += '"' + e + '"';
    }
    buf += '\n';
    out << buf;
  }
}

}  // namespace armfatigue
