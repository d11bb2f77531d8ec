// Command-line front end: `simulate` one scenario or `sweep` a grid.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "armfatigue/errors.hpp"
#include "armfatigue/scenario.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct SimulateOptions {
  std::string scenario;
  std::string out;
  std::string summary;
  std::string mode;
  std::optional<double> duration_s;
  std::optional<double> dt_s;
};

struct SweepOptions {
  std::string scenario;
  std::string grid;
  std::string out;
  unsigned threads = 0;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw armfatigue::Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw armfatigue::Error("failed writing " + path);
}

void print_crossings(const armfatigue::RunSummary& sum) {
  for (auto j : {armfatigue::kShoulder, armfatigue::kElbow}) {
    const char* name = j == armfatigue::kShoulder ? "shoulder" : "elbow";
    const auto& c = sum.crossings.joint[j];
    if (c) {
      std::printf("%-8s risk crossing at %.2f s (%.2f min), %s\n", name, c->time, c->time / 60.0,
                  armfatigue::group_name(c->group));
    } else {
      std::printf("%-8s no risk crossing within %.0f s\n", name, sum.duration_s);
    }
  }
  for (const auto& w : sum.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int run_simulate(const SimulateOptions& o) {
  using namespace armfatigue;
  Scenario s = load_scenario_file(o.scenario);
  if (!o.mode.empty()) {
    if (o.mode == "quasistatic") {
      s.run.mode = MvcMode::kQuasiStatic;
    } else if (o.mode == "static_min_mvc") {
      s.run.mode = MvcMode::kStaticMinOverCycle;
    } else {
      throw ValidationError("--mode", "'" + o.mode + "' is not one of quasistatic|static_min_mvc");
    }
  }
  if (o.duration_s) s.run.duration_s = *o.duration_s;
  if (o.dt_s) s.run.dt_s = *o.dt_s;
  validate_scenario(s);

  const RunResult r = run(s, true);
  write_trace_csv(r.trace, o.out);
  if (!o.summary.empty()) write_text(o.summary, summary_json(r.summary));
  print_crossings(r.summary);
  return 0;
}

int run_sweep(const SweepOptions& o) {
  using namespace armfatigue;
  const Scenario base = load_scenario_file(o.scenario);
  const SweepGrid grid = load_grid_file(o.grid);
  const SweepResult result = sweep(base, grid, o.threads);
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + o.out + " for writing");
  write_sweep_csv(result, out);
  std::size_t failed = 0;
  for (const auto& c : result.ranked) failed += c.ok ? 0 : 1;
  std::printf("%zu cells evaluated, %zu failed\n", result.ranked.size(), failed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint-level muscle fatigue simulator for repetitive push/pull arm tasks"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one scenario and write the trace CSV");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON file")->required();
  simulate->add_option("--out", sim.out, "Trace CSV destination")->required();
  simulate->add_option("--summary", sim.summary, "Summary JSON destination");
  simulate->add_option("--mode", sim.mode, "quasistatic|static_min_mvc (overrides run.mode)");
  simulate->add_option("--duration-s", sim.duration_s, "Horizon in seconds (overrides run.duration_s)");
  simulate->add_option("--dt-s", sim.dt_s, "Time step in seconds (overrides run.dt_s)");

  SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "Rank task configurations of a grid");
  sweep->add_option("--scenario", sw.scenario, "Base scenario JSON file")->required();
  sweep->add_option("--grid", sw.grid, "Grid JSON file")->required();
  sweep->add_option("--out", sw.out, "Ranked CSV destination")->required();
  sweep->add_option("--threads", sw.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*simulate) return run_simulate(sim);
    return run_sweep(sw);
  } catch (const armfatigue::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
