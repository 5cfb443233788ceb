#include <cmath>
#include <complex>
#include <sstream>

#include "gridport/errors.hpp"
#include "gridport/whole_system.hpp"

namespace gridport {

namespace {

using cd = std::complex<double>;

Eigen::Matrix2d rot_of(double eps) {
  Eigen::Matrix2d t;
  t << std::cos(eps), -std::sin(eps), std::sin(eps), std::cos(eps);
  return t;
}

const Eigen::Matrix2d kW = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();

std::vector<std::string> local_state_names(const ApparatusParams& params) {
  if (std::holds_alternative<SGParams>(params)) return {"psi_d", "psi_q", "omega"};
  return {"i_d", "i_q", "gamma_d", "gamma_q", "x_pll", "v_dc", "gamma_dc"};
}

// per-bus capacitance and conductance with every shunt folded in
void bus_shunts(const WholeSystem& ws, Eigen::VectorXd& cap, Eigen::VectorXd& cond) {
  const auto nbus = static_cast<Eigen::Index>(ws.net.buses.size());
  cap = Eigen::VectorXd::Zero(nbus);
  cond = Eigen::VectorXd::Zero(nbus);
  for (Eigen::Index k = 0; k < nbus; ++k) cap(k) = ws.net.buses[static_cast<size_t>(k)].shunt_c;
  for (const auto& br : ws.net.branches) {
    cap(ws.net.bus_index(br.from)) += br.b / (2.0 * br.tap * br.tap);
    cap(ws.net.bus_index(br.to)) += br.b / 2.0;
  }
  for (const auto& ld : ws.loads) {
    cap(ld.bus) += ld.c_extra;
    cond(ld.bus) += ld.g;
  }
}

Eigen::Vector2d bus_voltage(const WholeSystem& ws, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, int bus) {
  if (ws.bus_state[static_cast<size_t>(bus)] >= 0) {
    return x.segment<2>(ws.bus_state[static_cast<size_t>(bus)]);
  }
  return u.segment<2>(ws.source_input[static_cast<size_t>(bus)]);
}

void polish_equilibrium(WholeSystem& ws) {
  Eigen::VectorXd x = ws.x0;
  Eigen::VectorXd r = whole_rhs(ws, x, ws.u0);
  double res = r.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < 25 && res > 1e-12; ++iter) {
    const Eigen::MatrixXd jac = whole_jacobian(ws, x, ws.u0);
    const Eigen::VectorXd dx = jac.completeOrthogonalDecomposition().solve(-r);
    double alpha = 1.0;
    bool improved = false;
    for (int h = 0; h < 25; ++h) {
      const Eigen::VectorXd xn = x + alpha * dx;
      const Eigen::VectorXd rn = whole_rhs(ws, xn, ws.u0);
      const double rnn = rn.lpNorm<Eigen::Infinity>();
      if (rnn < res) {
        x = xn;
        r = rn;
        res = rnn;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;
  }
  if (res > 1e-5) {
    std::ostringstream msg;
    msg << "steady-state: whole-system equilibrium residual stalled at " << res
        << "; the power flow and apparatus setpoints are inconsistent";
    throw NumericalError(msg.str());
  }
  ws.x0 = x;
}

}  // namespace

WholeSystem build_whole_system(const std::vector<Apparatus>& apparatus,
                               const std::vector<SteadyState>& states,
                               const NetworkData& net,
                               const std::vector<LoadImpedance>& loads,
                               const std::vector<std::string>& source_buses,
                               const Eigen::VectorXd& v_mag, const Eigen::VectorXd& theta) {
  if (apparatus.size() != states.size()) {
    throw ConfigError("build_whole_system needs one steady state per apparatus");
  }
  validate(net);
  const auto nbus = static_cast<Eigen::Index>(net.buses.size());
  if (v_mag.size() != nbus || theta.size() != nbus) {
    throw ConfigError("voltage profile length does not match the bus count");
  }

  WholeSystem ws;
  ws.net = net;
  ws.loads = loads;
  ws.source_buses = source_buses;

  std::vector<int> is_source(static_cast<size_t>(nbus), 0);
  for (const auto& id : source_buses) is_source[static_cast<size_t>(net.bus_index(id))] = 1;

  int cursor = 0;
  for (size_t k = 0; k < apparatus.size(); ++k) {
    Apparatus bound = apparatus[k];
    bound.params = states[k].params;
    const int bus = net.bus_index(bound.bus);
    if (is_source[static_cast<size_t>(bus)]) {
      throw ConfigError("apparatus " + bound.id + " sits on source bus " + bound.bus);
    }
    ws.apparatus.push_back(bound);
    ws.ap_bus.push_back(bus);
    ws.ap_offset.push_back(cursor);
    const int sz = static_cast<int>(state_count(bound.params));
    ws.ap_size.push_back(sz);
    cursor += sz + 1;
  }

  ws.bus_state.assign(static_cast<size_t>(nbus), -1);
  for (Eigen::Index k = 0; k < nbus; ++k) {
    if (!is_source[static_cast<size_t>(k)]) {
      ws.bus_state[static_cast<size_t>(k)] = cursor;
      cursor += 2;
    }
  }
  ws.branch_state.assign(net.branches.size(), -1);
  for (size_t m = 0; m < net.branches.size(); ++m) {
    const int f = net.bus_index(net.branches[m].from);
    const int t = net.bus_index(net.branches[m].to);
    if (ws.bus_state[static_cast<size_t>(f)] >= 0 || ws.bus_state[static_cast<size_t>(t)] >= 0) {
      ws.branch_state[m] = cursor;
      cursor += 2;
    }
  }
  ws.load_state.assign(loads.size(), -1);
  for (size_t q = 0; q < loads.size(); ++q) {
    if (loads[q].l > 0.0 && ws.bus_state[static_cast<size_t>(loads[q].bus)] >= 0) {
      ws.load_state[q] = cursor;
      cursor += 2;
    }
  }
  ws.n_states = cursor;

  ws.source_input.assign(static_cast<size_t>(nbus), -1);
  int ucursor = 0;
  for (size_t k = 0; k < ws.apparatus.size(); ++k) {
    ws.input_labels.push_back(
        {ws.apparatus[k].id, mech_input_signal(ws.apparatus[k].params)});
    ++ucursor;
  }
  for (Eigen::Index k = 0; k < nbus; ++k) {
    if (is_source[static_cast<size_t>(k)]) {
      ws.source_input[static_cast<size_t>(k)] = ucursor;
      ws.input_labels.push_back({net.buses[static_cast<size_t>(k)].id, Signal::v_D});
      ws.input_labels.push_back({net.buses[static_cast<size_t>(k)].id, Signal::v_Q});
      ucursor += 2;
    }
  }
  ws.n_inputs = ucursor;

  // names for probing and diagnostics
  ws.state_names.assign(static_cast<size_t>(ws.n_states), "");
  for (size_t k = 0; k < ws.apparatus.size(); ++k) {
    const auto names = local_state_names(ws.apparatus[k].params);
    for (size_t j = 0; j < names.size(); ++j) {
      ws.state_names[static_cast<size_t>(ws.ap_offset[k]) + j] =
          ws.apparatus[k].id + "." + names[j];
    }
    ws.state_names[static_cast<size_t>(ws.angle_index(static_cast<int>(k)))] =
        ws.apparatus[k].id + ".epsilon";
  }
  for (Eigen::Index k = 0; k < nbus; ++k) {
    const int off = ws.bus_state[static_cast<size_t>(k)];
    if (off < 0) continue;
    ws.state_names[static_cast<size_t>(off)] = net.buses[static_cast<size_t>(k)].id + ".v_D";
    ws.state_names[static_cast<size_t>(off) + 1] =
        net.buses[static_cast<size_t>(k)].id + ".v_Q";
  }
  for (size_t m = 0; m < net.branches.size(); ++m) {
    const int off = ws.branch_state[m];
    if (off < 0) continue;
    ws.state_names[static_cast<size_t>(off)] = "branch[" + std::to_string(m) + "].i_D";
    ws.state_names[static_cast<size_t>(off) + 1] = "branch[" + std::to_string(m) + "].i_Q";
  }
  for (size_t q = 0; q < loads.size(); ++q) {
    const int off = ws.load_state[q];
    if (off < 0) continue;
    const auto& id = net.buses[static_cast<size_t>(loads[q].bus)].id;
    ws.state_names[static_cast<size_t>(off)] = "load[" + id + "].i_D";
    ws.state_names[static_cast<size_t>(off) + 1] = "load[" + id + "].i_Q";
  }

  // equilibrium from the solved pieces
  ws.x0 = Eigen::VectorXd::Zero(ws.n_states);
  ws.u0 = Eigen::VectorXd::Zero(ws.n_inputs);
  for (size_t k = 0; k < ws.apparatus.size(); ++k) {
    ws.x0.segment(ws.ap_offset[k], ws.ap_size[k]) = states[k].op.state;
    ws.x0(ws.angle_index(static_cast<int>(k))) = states[k].op.epsilon0;
    ws.u0(static_cast<Eigen::Index>(k)) = states[k].op.input(2);
  }
  auto phasor = [&](Eigen::Index k) { return std::polar(v_mag(k), theta(k)); };
  for (Eigen::Index k = 0; k < nbus; ++k) {
    const cd v = phasor(k);
    const int off = ws.bus_state[static_cast<size_t>(k)];
    if (off >= 0) {
      ws.x0(off) = v.real();
      ws.x0(off + 1) = v.imag();
    } else {
      const int ui = ws.source_input[static_cast<size_t>(k)];
      ws.u0(ui) = v.real();
      ws.u0(ui + 1) = v.imag();
    }
  }
  for (size_t m = 0; m < net.branches.size(); ++m) {
    const int off = ws.branch_state[m];
    if (off < 0) continue;
    const auto& br = net.branches[m];
    const cd vf = phasor(net.bus_index(br.from));
    const cd vt = phasor(net.bus_index(br.to));
    const cd i = (vf / br.tap - vt) / (br.r + cd(0.0, net.omega0 * br.l));
    ws.x0(off) = i.real();
    ws.x0(off + 1) = i.imag();
  }
  for (size_t q = 0; q < loads.size(); ++q) {
    const int off = ws.load_state[q];
    if (off < 0) continue;
    const cd v = phasor(loads[q].bus);
    const cd i = v / cd(0.0, net.omega0 * loads[q].l);
    ws.x0(off) = i.real();
    ws.x0(off + 1) = i.imag();
  }

  polish_equilibrium(ws);
  return ws;
}

Eigen::VectorXd whole_rhs(const WholeSystem& ws, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u) {
  if (x.size() != ws.n_states || u.size() != ws.n_inputs) {
    throw ConfigError("whole-system state or input size mismatch");
  }
  const auto nbus = static_cast<Eigen::Index>(ws.net.buses.size());
  const double wbn = ws.net.omega_base;
  const double w0 = ws.net.omega0;
  Eigen::VectorXd cap, cond;
  bus_shunts(ws, cap, cond);

  Eigen::VectorXd dx = Eigen::VectorXd::Zero(ws.n_states);
  std::vector<Eigen::Vector2d> inj(static_cast<size_t>(nbus), Eigen::Vector2d::Zero());

  for (size_t k = 0; k < ws.apparatus.size(); ++k) {
    const auto& ap = ws.apparatus[k];
    const double eps = x(ws.angle_index(static_cast<int>(k)));
    const Eigen::Matrix2d t = rot_of(eps);
    const Eigen::Vector2d v_dq = t.transpose() * bus_voltage(ws, x, u, ws.ap_bus[k]);
    Eigen::Vector3d u_local(v_dq(0), v_dq(1), u(static_cast<Eigen::Index>(k)));
    const Eigen::VectorXd x_local = x.segment(ws.ap_offset[k], ws.ap_size[k]);
    dx.segment(ws.ap_offset[k], ws.ap_size[k]) = dynamics(ap.params, x_local, u_local);
    const Eigen::Vector3d y = terminal(ap.params, x_local, u_local);
    const double wb = std::visit([](const auto& p) { return p.omega_base; }, ap.params);
    dx(ws.angle_index(static_cast<int>(k))) = wb * (y(2) - 1.0);
    inj[static_cast<size_t>(ws.ap_bus[k])] += t * y.head<2>();
  }

  for (size_t m = 0; m < ws.net.branches.size(); ++m) {
    const int off = ws.branch_state[m];
    if (off < 0) continue;
    const auto& br = ws.net.branches[m];
    const int f = ws.net.bus_index(br.from);
    const int tt = ws.net.bus_index(br.to);
    const Eigen::Vector2d vf = bus_voltage(ws, x, u, f);
    const Eigen::Vector2d vt = bus_voltage(ws, x, u, tt);
    const Eigen::Vector2d i = x.segment<2>(off);
    dx.segment<2>(off) = (wbn / br.l) * (vf / br.tap - vt - br.r * i) - wbn * w0 * kW * i;
    inj[static_cast<size_t>(f)] -= i / br.tap;
    inj[static_cast<size_t>(tt)] += i;
  }

  for (size_t q = 0; q < ws.loads.size(); ++q) {
    const int off = ws.load_state[q];
    if (off < 0) continue;
    const auto& ld = ws.loads[q];
    const Eigen::Vector2d v = bus_voltage(ws, x, u, ld.bus);
    const Eigen::Vector2d i = x.segment<2>(off);
    dx.segment<2>(off) = (wbn / ld.l) * v - wbn * w0 * kW * i;
    inj[static_cast<size_t>(ld.bus)] -= i;
  }

  for (Eigen::Index k = 0; k < nbus; ++k) {
    const int off = ws.bus_state[static_cast<size_t>(k)];
    if (off < 0) continue;
    const Eigen::Vector2d v = x.segment<2>(off);
    dx.segment<2>(off) =
        (wbn / cap(k)) * (inj[static_cast<size_t>(k)] - cond(k) * v) - wbn * w0 * kW * v;
  }
  return dx;
}

Eigen::MatrixXd whole_jacobian(const WholeSystem& ws, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) {
  if (x.size() != ws.n_states || u.size() != ws.n_inputs) {
    throw ConfigError("whole-system state or input size mismatch");
  }
  const auto nbus = static_cast<Eigen::Index>(ws.net.buses.size());
  const double wbn = ws.net.omega_base;
  const double w0 = ws.net.omega0;
  Eigen::VectorXd cap, cond;
  bus_shunts(ws, cap, cond);

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(ws.n_states, ws.n_states);

  for (size_t k = 0; k < ws.apparatus.size(); ++k) {
    const auto& ap = ws.apparatus[k];
    const int off = ws.ap_offset[k];
    const int sz = ws.ap_size[k];
    const int ai = ws.angle_index(static_cast<int>(k));
    const int vb = ws.bus_state[static_cast<size_t>(ws.ap_bus[k])];
    const double eps = x(ai);
    const Eigen::Matrix2d t = rot_of(eps);
    const Eigen::Vector2d v_dq = t.transpose() * bus_voltage(ws, x, u, ws.ap_bus[k]);
    Eigen::Vector3d u_local(v_dq(0), v_dq(1), u(static_cast<Eigen::Index>(k)));
    const Eigen::VectorXd x_local = x.segment(off, sz);
    const double wb = std::visit([](const auto& p) { return p.omega_base; }, ap.params);

    Eigen::MatrixXd fx, fu;
    jacobians(ap.params, x_local, u_local, fx, fu);
    Eigen::MatrixXd cy, dy;
    terminal_jacobians(ap.params, cy, dy);

    // local voltage sensitivities: to the bus pair (when a state) and the angle
    const Eigen::Vector2d dv_deps = -kW * v_dq;

    jac.block(off, off, sz, sz) = fx;
    jac.block(off, ai, sz, 1) = fu.leftCols<2>() * dv_deps;
    jac(ai, ai) = wb * (dy.row(2).head<2>() * dv_deps)(0);
    jac.block(ai, off, 1, sz) = wb * cy.row(2);
    if (vb >= 0) {
      jac.block(off, vb, sz, 2) = fu.leftCols<2>() * t.transpose();
      jac.block(ai, vb, 1, 2) = wb * dy.row(2).head<2>() * t.transpose();

      // current injection derivative blocks feed the bus voltage rows
      const Eigen::Vector3d y = terminal(ap.params, x_local, u_local);
      const Eigen::Matrix2d scale = (wbn / cap(ws.ap_bus[k])) * Eigen::Matrix2d::Identity();
      jac.block(vb, off, 2, sz) += scale * (t * cy.topRows<2>());
      const Eigen::Vector2d deps =
          t * kW * y.head<2>() + t * (dy.topRows<2>().leftCols<2>() * dv_deps);
      jac.block(vb, ai, 2, 1) += scale * deps;
      jac.block(vb, vb, 2, 2) += scale * (t * dy.topRows<2>().leftCols<2>() * t.transpose());
    }
  }

  for (size_t m = 0; m < ws.net.branches.size(); ++m) {
    const int off = ws.branch_state[m];
    if (off < 0) continue;
    const auto& br = ws.net.branches[m];
    const int f = ws.net.bus_index(br.from);
    const int tt = ws.net.bus_index(br.to);
    const int vf = ws.bus_state[static_cast<size_t>(f)];
    const int vt = ws.bus_state[static_cast<size_t>(tt)];
    jac.block<2, 2>(off, off) =
        -(wbn * br.r / br.l) * Eigen::Matrix2d::Identity() - wbn * w0 * kW;
    if (vf >= 0) {
      jac.block<2, 2>(off, vf) = (wbn / (br.l * br.tap)) * Eigen::Matrix2d::Identity();
      jac.block<2, 2>(vf, off) -= (wbn / (cap(f) * br.tap)) * Eigen::Matrix2d::Identity();
    }
    if (vt >= 0) {
      jac.block<2, 2>(off, vt) = -(wbn / br.l) * Eigen::Matrix2d::Identity();
      jac.block<2, 2>(vt, off) += (wbn / cap(tt)) * Eigen::Matrix2d::Identity();
    }
  }

  for (size_t q = 0; q < ws.loads.size(); ++q) {
    const int off = ws.load_state[q];
    if (off < 0) continue;
    const auto& ld = ws.loads[q];
    const int vb = ws.bus_state[static_cast<size_t>(ld.bus)];
    jac.block<2, 2>(off, off) = -wbn * w0 * kW;
    jac.block<2, 2>(off, vb) = (wbn / ld.l) * Eigen::Matrix2d::Identity();
    jac.block<2, 2>(vb, off) -= (wbn / cap(ld.bus)) * Eigen::Matrix2d::Identity();
  }

  for (Eigen::Index k = 0; k < nbus; ++k) {
    const int off = ws.bus_state[static_cast<size_t>(k)];
    if (off < 0) continue;
    jac.block<2, 2>(off, off) +=
        -(wbn * cond(k) / cap(k)) * Eigen::Matrix2d::Identity() - wbn * w0 * kW;
  }
  return jac;
}

Eigen::MatrixXd monolithic_state_matrix(const WholeSystem& ws) {
  return whole_jacobian(ws, ws.x0, ws.u0);
}

}  // namespace gridport
