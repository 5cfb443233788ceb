#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gridport/apparatus.hpp"
#include "gridport/network.hpp"
#include "gridport/power_flow.hpp"
#include "gridport/simulate.hpp"
#include "gridport/state_space.hpp"
#include "gridport/whole_system.hpp"

namespace gridport {

/// Case description as read from a config file: network tables, apparatus
/// placements, parameter sweeps, and time-domain scenarios.  Parsing applies
/// every documented default, so a parsed config is fully resolved.
struct BusConfig {
  std::string id;
  BusKind kind = BusKind::pq;
  double v_set = 1.0;
  double theta_set = 0.0;
  double p_gen = 0.0;
  double q_gen = 0.0;
  double p_load = 0.0;
  double q_load = 0.0;
  double shunt_c = kDefaultShuntC;
};

struct BranchConfig {
  std::string from;
  std::string to;
  double r = 0.0;
  double l = 0.0;
  double b = 0.0;
  double tap = 1.0;
};

struct ApparatusConfig {
  std::string id;
  std::string bus;
  ApparatusParams params;  ///< machine or inverter parameters, defaults applied
};

struct SweepSpec {
  std::string parameter;  ///< path such as branches[0].r or apparatus[sg1].K_D
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
};

/// Timed action inside a scenario: either a parameter change (the model is
/// rebuilt, the state carries over) or a step on one model input.
struct EventSpec {
  double time = 0.0;
  bool is_input = false;
  std::string target;   ///< parameter path, or input port as "id.signal"
  double value = 0.0;
  bool is_delta = false;  ///< input steps may be relative to the initial input
};

struct ScenarioSpec {
  std::string name;
  double t_end = 0.0;
  double dt = 5e-5;
  int record_every = 20;
  std::vector<std::string> probes;  ///< state names; empty records everything
  std::vector<EventSpec> events;
};

struct CaseConfig {
  std::string name;
  double base_frequency_hz = 60.0;
  std::string output_dir = "out";
  std::vector<BusConfig> buses;
  std::vector<BranchConfig> branches;
  std::vector<ApparatusConfig> apparatus;
  std::vector<SweepSpec> sweeps;
  std::vector<ScenarioSpec> scenarios;
};

/// Reads and validates a config file.  Unknown keys, type mismatches, and
/// dangling references are ConfigErrors naming the offending key path; syntax
/// errors carry the line number.
[[nodiscard]] CaseConfig parse_config(const std::string& path);
[[nodiscard]] CaseConfig parse_config_text(const std::string& text, const std::string& origin);

/// Serializes a fully resolved config; parse(dump(x)) == x, byte for byte on
/// a second dump.
[[nodiscard]] std::string dump_config(const CaseConfig& cfg);

/// Sets one numeric parameter through its path.  Throws ConfigError when the
/// path does not resolve, naming the missing element.
void apply_parameter(CaseConfig& cfg, const std::string& path, double value);

/// Everything the analysis commands need, built in one pass:
/// power flow -> per-apparatus steady states -> embedded models -> closed
/// system, plus the nonlinear whole-circuit model for simulation.  Errors from
/// the stages are rethrown with a stage prefix (power-flow / steady-state /
/// assembly).
struct BuiltCase {
  CaseConfig config;
  NetworkData net;
  PowerFlowSolution pf;
  std::vector<LoadImpedance> loads;
  std::vector<Apparatus> apparatus;
  std::vector<SteadyState> steady;
  std::vector<std::string> source_buses;  ///< slack buses without apparatus
  StateSpaceModel assembled;
  std::shared_ptr<const WholeSystem> whole;
};

[[nodiscard]] BuiltCase build_case(const CaseConfig& cfg);

/// Network tables of a config without building any dynamic model, for
/// commands that stop at the phasor layer.
[[nodiscard]] NetworkData network_from_config(const CaseConfig& cfg);

/// Runs one named scenario: parameter events split the run into segments with
/// rebuilt models, input events become steps, probes select recorded states.
struct ScenarioRun {
  SimTrace trace;
  std::vector<std::shared_ptr<const WholeSystem>> systems;  ///< keeps segments alive
};

[[nodiscard]] ScenarioRun run_scenario(const CaseConfig& cfg, const std::string& scenario_name);

}  // namespace gridport
