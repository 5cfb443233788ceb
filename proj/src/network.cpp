#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gridport/errors.hpp"
#include "gridport/network.hpp"

namespace gridport {

namespace {

using cd = std::complex<double>;

// capacitor admittance in complex-signal form; c carries the pu capacitance
cd shunt_admittance(double c, cd s, double omega0, double omega_base) {
  return c * (s / omega_base + cd(0.0, omega0));
}

cd series_admittance(const BranchSpec& br, cd s, double omega0, double omega_base) {
  return 1.0 / (br.r + s * br.l / omega_base + cd(0.0, omega0 * br.l));
}

cd load_admittance(const LoadImpedance& ld, cd s, double omega0, double omega_base) {
  cd y(ld.g, 0.0);
  if (ld.l > 0.0) y += 1.0 / (s * ld.l / omega_base + cd(0.0, omega0 * ld.l));
  y += shunt_admittance(ld.c_extra, s, omega0, omega_base);
  return y;
}

}  // namespace

int NetworkData::bus_index(const std::string& id) const {
  for (size_t k = 0; k < buses.size(); ++k) {
    if (buses[k].id == id) return static_cast<int>(k);
  }
  throw ConfigError("no bus named " + id);
}

void validate(const NetworkData& net) {
  if (net.buses.empty()) throw ConfigError("network has no buses");
  std::set<std::string> seen;
  for (const auto& b : net.buses) {
    if (!seen.insert(b.id).second) throw ConfigError("duplicate bus id " + b.id);
    if (b.p_load < 0.0) {
      throw ConfigError("bus " + b.id + ": active load must be non-negative");
    }
    if (b.shunt_c < 0.0) throw ConfigError("bus " + b.id + ": negative shunt capacitance");
  }
  int slacks = 0;
  for (const auto& b : net.buses) slacks += (b.kind == BusKind::slack) ? 1 : 0;
  if (slacks != 1) {
    throw ConfigError("network needs exactly one slack bus, found " + std::to_string(slacks));
  }
  for (size_t m = 0; m < net.branches.size(); ++m) {
    const auto& br = net.branches[m];
    if (!seen.count(br.from)) {
      throw ConfigError("branch " + std::to_string(m) + " references unknown bus " + br.from);
    }
    if (!seen.count(br.to)) {
      throw ConfigError("branch " + std::to_string(m) + " references unknown bus " + br.to);
    }
    if (br.from == br.to) {
      throw ConfigError("branch " + std::to_string(m) + " connects bus " + br.from +
                        " to itself");
    }
    if (!(br.l > 0.0)) {
      throw ConfigError("branch " + std::to_string(m) + ": series inductance must be positive");
    }
    if (br.r < 0.0 || br.b < 0.0 || !(br.tap > 0.0)) {
      throw ConfigError("branch " + std::to_string(m) + ": malformed parameters");
    }
  }
  if (!(net.omega0 > 0.0) || !(net.omega_base > 0.0)) {
    throw ConfigError("network frequency bases must be positive");
  }

  // reachability from the slack over branches
  std::vector<int> color(net.buses.size(), 0);
  std::vector<int> stack;
  for (size_t k = 0; k < net.buses.size(); ++k) {
    if (net.buses[k].kind == BusKind::slack) stack.push_back(static_cast<int>(k));
  }
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    if (color[k]) continue;
    color[k] = 1;
    for (const auto& br : net.branches) {
      const int f = net.bus_index(br.from);
      const int t = net.bus_index(br.to);
      if (f == k && !color[t]) stack.push_back(t);
      if (t == k && !color[f]) stack.push_back(f);
    }
  }
  for (size_t k = 0; k < net.buses.size(); ++k) {
    if (!color[k]) {
      throw ConfigError("bus " + net.buses[k].id + " is not connected to the slack bus");
    }
  }
}

std::vector<LoadImpedance> constant_impedance_loads(const NetworkData& net,
                                                    const Eigen::VectorXd& v_mag) {
  if (v_mag.size() != static_cast<Eigen::Index>(net.buses.size())) {
    throw ConfigError("voltage profile length does not match the bus count");
  }
  std::vector<LoadImpedance> loads;
  for (size_t k = 0; k < net.buses.size(); ++k) {
    const auto& b = net.buses[k];
    if (b.p_load == 0.0 && b.q_load == 0.0) continue;
    const double v2 = v_mag(static_cast<Eigen::Index>(k)) * v_mag(static_cast<Eigen::Index>(k));
    if (!(v2 > 0.0)) {
      throw ConfigError("bus " + b.id + ": load conversion needs a positive voltage");
    }
    LoadImpedance ld;
    ld.bus = static_cast<int>(k);
    ld.g = b.p_load / v2;
    if (b.q_load > 0.0) {
      ld.l = v2 / (net.omega0 * b.q_load);
    } else if (b.q_load < 0.0) {
      ld.c_extra = -b.q_load / (v2 * net.omega0);
    }
    loads.push_back(ld);
  }
  return loads;
}

Eigen::Matrix2cd branch_impedance_dq(double r, double l, double omega0, double omega_base,
                                     cd s) {
  const cd diag = r + s * l / omega_base;
  Eigen::Matrix2cd z;
  z << diag, -omega0 * l, omega0 * l, diag;
  return z;
}

StateSpaceModel branch_admittance_model(const std::string& port_id, double r, double l,
                                        double omega0, double omega_base) {
  if (!(l > 0.0)) throw ConfigError("branch inductance must be positive");
  Eigen::Matrix2d w;
  w << 0.0, -1.0, 1.0, 0.0;
  const Eigen::Matrix2d a =
      -(omega_base * r / l) * Eigen::Matrix2d::Identity() - omega_base * omega0 * w;
  const Eigen::Matrix2d b = (omega_base / l) * Eigen::Matrix2d::Identity();
  return StateSpaceModel(a, b, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero(),
                         {{port_id, Signal::v_D}, {port_id, Signal::v_Q}},
                         {{port_id, Signal::i_D}, {port_id, Signal::i_Q}});
}

NodalAdmittance::NodalAdmittance(NetworkData net, std::vector<LoadImpedance> loads)
    : net_(std::move(net)), loads_(std::move(loads)) {}

Eigen::MatrixXcd NodalAdmittance::at(cd s) const {
  const auto n = static_cast<Eigen::Index>(net_.buses.size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : net_.branches) {
    const auto f = net_.bus_index(br.from);
    const auto t = net_.bus_index(br.to);
    const cd ys = series_admittance(br, s, net_.omega0, net_.omega_base);
    const cd ych = shunt_admittance(br.b / 2.0, s, net_.omega0, net_.omega_base);
    const double tap2 = br.tap * br.tap;
    y(f, f) += (ys + ych) / tap2;
    y(t, t) += ys + ych;
    y(f, t) -= ys / br.tap;
    y(t, f) -= ys / br.tap;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    y(k, k) += shunt_admittance(net_.buses[static_cast<size_t>(k)].shunt_c, s, net_.omega0,
                                net_.omega_base);
  }
  for (const auto& ld : loads_) y(ld.bus, ld.bus) += load_admittance(ld, s, net_.omega0,
                                                                     net_.omega_base);
  return y;
}

NodalAdmittance build_nodal_admittance(const NetworkData& net,
                                       std::vector<LoadImpedance> loads) {
  std::vector<int> touched(net.buses.size(), 0);
  for (const auto& br : net.branches) {
    touched[static_cast<size_t>(net.bus_index(br.from))] = 1;
    touched[static_cast<size_t>(net.bus_index(br.to))] = 1;
  }
  for (const auto& ld : loads) {
    if (ld.bus < 0 || ld.bus >= static_cast<int>(net.buses.size())) {
      throw ConfigError("load impedance attached to an unknown bus index");
    }
    touched[static_cast<size_t>(ld.bus)] = 1;
  }
  for (size_t k = 0; k < net.buses.size(); ++k) {
    if (net.buses[k].shunt_c > 0.0) touched[k] = 1;
    if (!touched[k]) {
      throw ConfigError("bus " + net.buses[k].id +
                        " has no connected elements; the admittance assembly is singular");
    }
  }
  return NodalAdmittance(net, std::move(loads));
}

StateSpaceModel nodal_impedance(const NetworkData& net, const std::vector<LoadImpedance>& loads,
                                const std::vector<std::string>& retained_buses,
                                const std::vector<std::string>& source_buses) {
  validate(net);
  const double wb = net.omega_base;
  const double w0 = net.omega0;
  Eigen::Matrix2d w;
  w << 0.0, -1.0, 1.0, 0.0;

  std::vector<int> is_source(net.buses.size(), 0);
  for (const auto& id : source_buses) is_source[static_cast<size_t>(net.bus_index(id))] = 1;

  // dynamic buses keep their order; sources carry no states
  std::vector<int> v_state(net.buses.size(), -1);
  int nd = 0;
  for (size_t k = 0; k < net.buses.size(); ++k) {
    if (!is_source[k]) v_state[k] = nd++;
  }

  std::vector<int> kept_branch;
  for (size_t m = 0; m < net.branches.size(); ++m) {
    const auto f = net.bus_index(net.branches[m].from);
    const auto t = net.bus_index(net.branches[m].to);
    if (v_state[static_cast<size_t>(f)] >= 0 || v_state[static_cast<size_t>(t)] >= 0) {
      kept_branch.push_back(static_cast<int>(m));
    }
  }

  std::vector<LoadImpedance> inductive;
  for (const auto& ld : loads) {
    if (is_source[static_cast<size_t>(ld.bus)]) continue;
    if (ld.l > 0.0) inductive.push_back(ld);
  }

  // total capacitance per dynamic bus: own shunt, charging halves, load extras
  Eigen::VectorXd cap = Eigen::VectorXd::Zero(nd);
  Eigen::VectorXd cond = Eigen::VectorXd::Zero(nd);
  for (size_t k = 0; k < net.buses.size(); ++k) {
    if (v_state[k] >= 0) cap(v_state[k]) += net.buses[k].shunt_c;
  }
  for (const auto& br : net.branches) {
    const auto f = v_state[static_cast<size_t>(net.bus_index(br.from))];
    const auto t = v_state[static_cast<size_t>(net.bus_index(br.to))];
    if (f >= 0) cap(f) += br.b / (2.0 * br.tap * br.tap);
    if (t >= 0) cap(t) += br.b / 2.0;
  }
  for (const auto& ld : loads) {
    const auto k = v_state[static_cast<size_t>(ld.bus)];
    if (k < 0) continue;
    cap(k) += ld.c_extra;
    cond(k) += ld.g;
  }
  for (size_t k = 0; k < net.buses.size(); ++k) {
    if (v_state[k] >= 0 && !(cap(v_state[k]) > 0.0)) {
      throw ConfigError("bus " + net.buses[k].id +
                        " has no capacitance; the network model needs a small shunt there");
    }
  }

  const int nb = static_cast<int>(kept_branch.size());
  const int nl = static_cast<int>(inductive.size());
  const int n = 2 * (nd + nb + nl);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  auto vblk = [&](int k) { return 2 * k; };
  auto bblk = [&](int m) { return 2 * (nd + m); };
  auto lblk = [&](int q) { return 2 * (nd + nb + q); };

  for (int k = 0; k < nd; ++k) {
    a.block<2, 2>(vblk(k), vblk(k)) = -(wb * cond(k) / cap(k)) * Eigen::Matrix2d::Identity() -
                                      wb * w0 * w;
  }
  for (int m = 0; m < nb; ++m) {
    const auto& br = net.branches[static_cast<size_t>(kept_branch[static_cast<size_t>(m)])];
    const auto f = v_state[static_cast<size_t>(net.bus_index(br.from))];
    const auto t = v_state[static_cast<size_t>(net.bus_index(br.to))];
    a.block<2, 2>(bblk(m), bblk(m)) =
        -(wb * br.r / br.l) * Eigen::Matrix2d::Identity() - wb * w0 * w;
    if (f >= 0) {
      a.block<2, 2>(bblk(m), vblk(f)) = (wb / (br.l * br.tap)) * Eigen::Matrix2d::Identity();
      a.block<2, 2>(vblk(f), bblk(m)) -=
          (wb / (cap(f) * br.tap)) * Eigen::Matrix2d::Identity();
    }
    if (t >= 0) {
      a.block<2, 2>(bblk(m), vblk(t)) = -(wb / br.l) * Eigen::Matrix2d::Identity();
      a.block<2, 2>(vblk(t), bblk(m)) += (wb / cap(t)) * Eigen::Matrix2d::Identity();
    }
  }
  for (int q = 0; q < nl; ++q) {
    const auto& ld = inductive[static_cast<size_t>(q)];
    const auto k = v_state[static_cast<size_t>(ld.bus)];
    a.block<2, 2>(lblk(q), lblk(q)) = -wb * w0 * w;
    a.block<2, 2>(lblk(q), vblk(k)) = (wb / ld.l) * Eigen::Matrix2d::Identity();
    a.block<2, 2>(vblk(k), lblk(q)) -= (wb / cap(k)) * Eigen::Matrix2d::Identity();
  }

  const auto np = static_cast<Eigen::Index>(retained_buses.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, 2 * np);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * np, n);
  std::vector<PortLabel> ins, outs;
  for (Eigen::Index p = 0; p < np; ++p) {
    const auto& id = retained_buses[static_cast<size_t>(p)];
    const auto k = v_state[static_cast<size_t>(net.bus_index(id))];
    if (k < 0) throw ConfigError("retained bus " + id + " is a source bus");
    b.block<2, 2>(vblk(k), 2 * p) = (wb / cap(k)) * Eigen::Matrix2d::Identity();
    c.block<2, 2>(2 * p, vblk(k)) = Eigen::Matrix2d::Identity();
    ins.push_back({id, Signal::i_D});
    ins.push_back({id, Signal::i_Q});
    outs.push_back({id, Signal::v_D});
    outs.push_back({id, Signal::v_Q});
  }
  return StateSpaceModel(std::move(a), std::move(b), std::move(c),
                         Eigen::MatrixXd::Zero(2 * np, 2 * np), std::move(ins),
                         std::move(outs));
}

double short_circuit_ratio(const NetworkData& net, const std::string& bus_id) {
  validate(net);
  const int target = net.bus_index(bus_id);
  if (net.buses[static_cast<size_t>(target)].kind == BusKind::slack) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXcd y = build_nodal_admittance(net).at(cd(0.0, 0.0));
  std::vector<int> alive;
  for (size_t k = 0; k < net.buses.size(); ++k) {
    if (net.buses[k].kind != BusKind::slack) alive.push_back(static_cast<int>(k));
  }
  Eigen::MatrixXcd yd(alive.size(), alive.size());
  for (size_t i = 0; i < alive.size(); ++i) {
    for (size_t j = 0; j < alive.size(); ++j) yd(i, j) = y(alive[i], alive[j]);
  }
  const auto pos = static_cast<Eigen::Index>(
      std::find(alive.begin(), alive.end(), target) - alive.begin());
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(yd);
  if (!lu.isInvertible()) {
    throw NumericalError("short-circuit reduction is singular at bus " + bus_id);
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(yd.rows());
  rhs(pos) = 1.0;
  const cd z = lu.solve(rhs)(pos);
  return 1.0 / std::abs(z);
}

}  // namespace gridport
