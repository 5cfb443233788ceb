#include <algorithm>
#include <map>
#include <memory>

#include "gridport/case_config.hpp"
#include "gridport/errors.hpp"
#include "gridport/port_mapping.hpp"

namespace gridport {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

NetworkData network_from_config(const CaseConfig& cfg) {
  NetworkData net;
  net.omega0 = 1.0;
  net.omega_base = 2.0 * kPi * cfg.base_frequency_hz;
  for (const BusConfig& b : cfg.buses) {
    BusSpec spec;
    spec.id = b.id;
    spec.kind = b.kind;
    spec.v_set = b.v_set;
    spec.theta_set = b.theta_set;
    spec.p_gen = b.p_gen;
    spec.q_gen = b.q_gen;
    spec.p_load = b.p_load;
    spec.q_load = b.q_load;
    spec.shunt_c = b.shunt_c;
    net.buses.push_back(std::move(spec));
  }
  for (const BranchConfig& br : cfg.branches) {
    net.branches.push_back({br.from, br.to, br.r, br.l, br.b, br.tap});
  }
  return net;
}

BuiltCase build_case(const CaseConfig& cfg) {
  BuiltCase built;
  built.config = cfg;
  built.net = network_from_config(cfg);
  stage("config", [&] {
    validate(built.net);
    return 0;
  });

  for (const ApparatusConfig& ac : cfg.apparatus) {
    Apparatus ap{ac.id, ac.bus, ac.params};
    if (auto* p = std::get_if<IBRParams>(&ap.params)) apply_bandwidth_gains(*p);
    built.apparatus.push_back(std::move(ap));
  }

  built.pf = stage("power-flow", [&] { return solve_power_flow(built.net); });
  built.loads = constant_impedance_loads(built.net, built.pf.v_mag);

  std::map<std::string, int> per_bus;
  for (const Apparatus& ap : built.apparatus) ++per_bus[ap.bus];
  stage("steady-state", [&] {
    for (Apparatus& ap : built.apparatus) {
      const int k = built.net.bus_index(ap.bus);
      const BusSpec& bus = built.net.buses[static_cast<size_t>(k)];
      const double share = 1.0 / per_bus[ap.bus];
      const TerminalConstraint tc{(built.pf.p_inj(k) + bus.p_load) * share,
                                  (built.pf.q_inj(k) + bus.q_load) * share, built.pf.v_mag(k),
                                  built.pf.theta(k)};
      built.steady.push_back(solve_steady_state(ap, tc));
      ap.params = built.steady.back().params;
    }
    return 0;
  });

  for (const BusConfig& bus : cfg.buses) {
    const bool hosts = per_bus.count(bus.id) > 0;
    if (bus.kind == BusKind::slack && !hosts) built.source_buses.push_back(bus.id);
  }

  if (!built.apparatus.empty()) {
    stage("assembly", [&] {
      std::vector<std::string> retained;
      for (const Apparatus& ap : built.apparatus) {
        if (std::find(retained.begin(), retained.end(), ap.bus) == retained.end()) {
          retained.push_back(ap.bus);
        }
      }
      std::vector<StateSpaceModel> globals;
      globals.reserve(built.apparatus.size());
      for (size_t k = 0; k < built.apparatus.size(); ++k) {
        globals.push_back(global_model(built.apparatus[k], built.steady[k]));
      }
      const StateSpaceModel grid =
          nodal_impedance(built.net, built.loads, retained, built.source_buses);
      built.assembled = assemble_system(built.apparatus, globals, grid);
      built.whole = std::make_shared<const WholeSystem>(
          build_whole_system(built.apparatus, built.steady, built.net, built.loads,
                             built.source_buses, built.pf.v_mag, built.pf.theta));
      return 0;
    });
  }
  return built;
}

ScenarioRun run_scenario(const CaseConfig& cfg, const std::string& scenario_name) {
  const auto it = std::find_if(cfg.scenarios.begin(), cfg.scenarios.end(),
                               [&](const ScenarioSpec& s) { return s.name == scenario_name; });
  if (it == cfg.scenarios.end()) {
    throw ConfigError("the case defines no scenario named \"" + scenario_name + "\"");
  }
  const ScenarioSpec& sc = *it;

  // parameter events grouped by instant, applied cumulatively
  std::map<double, std::vector<const EventSpec*>> boundaries;
  for (const EventSpec& ev : sc.events) {
    if (!ev.is_input && ev.time < sc.t_end) boundaries[ev.time].push_back(&ev);
  }

  // the initial state and inputs always come from the unmodified case; a
  // parameter event at time zero changes only the dynamics the run starts with
  ScenarioRun run;
  const BuiltCase base = build_case(cfg);
  if (base.whole == nullptr) {
    throw ConfigError("the case has no apparatus, so there is nothing to simulate");
  }
  run.systems.push_back(base.whole);

  CaseConfig current = cfg;
  if (!boundaries.empty() && boundaries.begin()->first <= 0.0) {
    for (const EventSpec* ev : boundaries.begin()->second) {
      apply_parameter(current, ev->target, ev->value);
    }
    boundaries.erase(boundaries.begin());
    run.systems.push_back(build_case(current).whole);
  }

  std::vector<SimSegment> segments;
  for (const auto& [time, events] : boundaries) {
    segments.push_back({run.systems.back().get(), time});
    for (const EventSpec* ev : events) apply_parameter(current, ev->target, ev->value);
    run.systems.push_back(build_case(current).whole);
  }
  segments.push_back({run.systems.back().get(), sc.t_end});

  const WholeSystem& ws = *base.whole;
  std::vector<InputStepEvent> steps;
  for (const EventSpec& ev : sc.events) {
    if (!ev.is_input) continue;
    const auto dot = ev.target.find('.');
    const PortLabel label{ev.target.substr(0, dot),
                          signal_from_string(ev.target.substr(dot + 1))};
    const auto pos = std::find(ws.input_labels.begin(), ws.input_labels.end(), label);
    if (pos == ws.input_labels.end()) {
      throw ConfigError("input event target " + ev.target + " is not an input of the model");
    }
    const int idx = static_cast<int>(pos - ws.input_labels.begin());
    const double value = ev.is_delta ? ws.u0(idx) + ev.value : ev.value;
    steps.push_back({ev.time, idx, value});
  }

  SimOptions options;
  options.dt = sc.dt;
  options.record_every = sc.record_every;
  for (const std::string& probe : sc.probes) {
    const auto pos = std::find(ws.state_names.begin(), ws.state_names.end(), probe);
    if (pos == ws.state_names.end()) {
      throw ConfigError("probe " + probe + " does not name a state of this case");
    }
    options.probes.push_back(static_cast<int>(pos - ws.state_names.begin()));
  }

  run.trace = simulate_nonlinear(segments, ws.x0, ws.u0, std::move(steps), options);
  return run;
}

}  // namespace gridport
