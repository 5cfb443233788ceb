#pragma once

#include <string>
#include <vector>

#include "gridport/apparatus.hpp"
#include "gridport/network.hpp"
#include "gridport/port_mapping.hpp"
#include "gridport/power_flow.hpp"
#include "gridport/whole_system.hpp"

namespace fixtures {

inline gridport::BusSpec bus(std::string id, gridport::BusKind kind) {
  gridport::BusSpec b;
  b.id = std::move(id);
  b.kind = kind;
  return b;
}

// One synchronous machine tied to an infinite bus through a series line.
// Line resistance, rotor damping, and inertia are the experiment knobs; the
// prefix keeps ids distinct when two copies live in one model.  The bus shunt
// is enlarged so the network resonance stays comfortably inside the region a
// 50 us explicit integrator can hold.
struct MachineOnLine {
  gridport::NetworkData net;
  gridport::Apparatus sg;
  gridport::PowerFlowSolution sol;
  gridport::SteadyState ss;

  explicit MachineOnLine(double r_b = 0.0, double k_d = 0.2, double j = 7.0,
                         const std::string& prefix = "") {
    gridport::BusSpec inf = bus(prefix + "inf", gridport::BusKind::slack);
    gridport::BusSpec b1 = bus(prefix + "b1", gridport::BusKind::pv);
    b1.v_set = 1.0;
    b1.p_gen = 0.5;
    b1.shunt_c = 0.01;
    net.buses = {inf, b1};
    net.branches = {{prefix + "inf", prefix + "b1", r_b, 0.4, 0.0, 1.0}};

    sg.id = prefix + "sg1";
    sg.bus = b1.id;
    gridport::SGParams p;
    p.J = j;
    p.K_D = k_d;
    p.L = 0.15;
    p.R = 0.01;
    sg.params = p;

    sol = gridport::solve_power_flow(net);
    const gridport::TerminalConstraint tc{0.5, sol.q_inj(1), sol.v_mag(1), sol.theta(1)};
    ss = gridport::solve_steady_state(sg, tc);
    sg.params = ss.params;
  }

  [[nodiscard]] gridport::WholeSystem system() const {
    return gridport::build_whole_system({sg}, {ss}, net, {}, {net.buses[0].id}, sol.v_mag,
                                        sol.theta);
  }

  [[nodiscard]] gridport::StateSpaceModel assembled() const {
    const gridport::StateSpaceModel grid =
        gridport::nodal_impedance(net, {}, {net.buses[1].id}, {net.buses[0].id});
    return gridport::assemble_system({sg}, {gridport::global_model(sg, ss)}, grid);
  }
};

// One inverter exporting fixed power through a series line; shrinking the grid
// strength (raising x_line) stresses its synchronization loop.
struct InverterOnLine {
  gridport::NetworkData net;
  gridport::Apparatus ibr;
  gridport::PowerFlowSolution sol;
  gridport::SteadyState ss;

  explicit InverterOnLine(double x_line = 0.35, double p_set = 0.3,
                          const std::string& prefix = "") {
    gridport::BusSpec inf = bus(prefix + "inf", gridport::BusKind::slack);
    gridport::BusSpec b1 = bus(prefix + "b1", gridport::BusKind::pq);
    b1.p_gen = p_set;
    b1.shunt_c = 0.01;
    net.buses = {inf, b1};
    net.branches = {{prefix + "inf", prefix + "b1", x_line / 10.0, x_line, 0.0, 1.0}};

    ibr.id = prefix + "ibr1";
    ibr.bus = b1.id;
    gridport::IBRParams p;
    gridport::apply_bandwidth_gains(p);
    ibr.params = p;

    sol = gridport::solve_power_flow(net);
    const gridport::TerminalConstraint tc{p_set, sol.q_inj(1), sol.v_mag(1), sol.theta(1)};
    ss = gridport::solve_steady_state(ibr, tc);
    ibr.params = ss.params;
  }

  [[nodiscard]] gridport::WholeSystem system() const {
    return gridport::build_whole_system({ibr}, {ss}, net, {}, {net.buses[0].id}, sol.v_mag,
                                        sol.theta);
  }

  [[nodiscard]] gridport::StateSpaceModel assembled() const {
    const gridport::StateSpaceModel grid =
        gridport::nodal_impedance(net, {}, {net.buses[1].id}, {net.buses[0].id});
    return gridport::assemble_system({ibr}, {gridport::global_model(ibr, ss)}, grid);
  }
};

}  // namespace fixtures
