#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridport/state_space.hpp"

namespace gridport {

inline constexpr double kDefaultShuntC = 1e-4;

enum class BusKind { slack, pv, pq };

struct BusSpec {
  std::string id;
  BusKind kind = BusKind::pq;
  double v_set = 1.0;      // magnitude target (slack, pv)
  double theta_set = 0.0;  // angle anchor in rad (slack)
  double p_gen = 0.0;      // scheduled active generation
  double q_gen = 0.0;      // scheduled reactive generation (pq only)
  double p_load = 0.0;
  double q_load = 0.0;     // positive inductive, negative capacitive
  double shunt_c = kDefaultShuntC;  // bus-to-ground capacitance, pu
};

struct BranchSpec {
  std::string from;
  std::string to;
  double r = 0.0;
  double l = 0.0;    // series inductance, equals the reactance at nominal speed
  double b = 0.0;    // total line charging, split half per end
  double tap = 1.0;  // ideal off-nominal ratio on the from side
};

struct NetworkData {
  std::vector<BusSpec> buses;
  std::vector<BranchSpec> branches;
  double omega0 = 1.0;                    // nominal frame speed, pu
  double omega_base = 2.0 * kPi * 60.0;   // rad/s per pu speed

  [[nodiscard]] int bus_index(const std::string& id) const;
};

/// Structural checks: unique ids, resolvable branch endpoints, positive series
/// inductance, positive tap, non-negative loads, exactly one slack bus, and
/// every bus reachable from it.
void validate(const NetworkData& net);

/// Constant-impedance realization of a bus load, produced from a solved
/// voltage profile.  Positive reactive demand becomes a shunt inductor,
/// negative demand extra shunt capacitance.
struct LoadImpedance {
  int bus = -1;
  double g = 0.0;        // shunt conductance
  double l = 0.0;        // shunt inductance, 0 when absent
  double c_extra = 0.0;  // additional shunt capacitance
};

[[nodiscard]] std::vector<LoadImpedance> constant_impedance_loads(const NetworkData& net,
                                                                  const Eigen::VectorXd& v_mag);

/// Frequency response of one series branch as a 2x2 DQ impedance.
[[nodiscard]] Eigen::Matrix2cd branch_impedance_dq(double r, double l, double omega0,
                                                   double omega_base, std::complex<double> s);

/// State-space admittance of one series branch: terminal voltage in, branch
/// current out, two states.
[[nodiscard]] StateSpaceModel branch_admittance_model(const std::string& port_id, double r,
                                                      double l, double omega0,
                                                      double omega_base);

/// Dynamic nodal admittance evaluated pointwise in complex form: entry (i, j)
/// is the complex-signal transfer from the voltage at bus j to the injected
/// current at bus i, equivalent to the 2x2 DQ block h*I + g*W with value
/// h + i*g.  At s = 0 this is the textbook phasor admittance matrix.
class NodalAdmittance {
 public:
  NodalAdmittance(NetworkData net, std::vector<LoadImpedance> loads);
  [[nodiscard]] Eigen::MatrixXcd at(std::complex<double> s) const;
  [[nodiscard]] const NetworkData& network() const { return net_; }

 private:
  NetworkData net_;
  std::vector<LoadImpedance> loads_;
};

[[nodiscard]] NodalAdmittance build_nodal_admittance(const NetworkData& net,
                                                     std::vector<LoadImpedance> loads = {});

/// State-space impedance of the network seen from the retained buses: summed
/// current injections in, bus voltage deviations out.  States are the shunt
/// voltages of every non-source bus, the series currents of branches touching
/// them, and the currents of inductive loads.  Source buses hold their voltage
/// fixed, so their deviations are identically zero and they contribute no
/// states.  Every non-source bus needs strictly positive total capacitance.
[[nodiscard]] StateSpaceModel nodal_impedance(const NetworkData& net,
                                              const std::vector<LoadImpedance>& loads,
                                              const std::vector<std::string>& retained_buses,
                                              const std::vector<std::string>& source_buses);

/// 1 / |Thevenin impedance| at the bus with all slack buses shorted, loads
/// excluded, shunts included, evaluated at the nominal frequency.  Returns
/// +infinity at a slack bus itself.
[[nodiscard]] double short_circuit_ratio(const NetworkData& net, const std::string& bus_id);

}  // namespace gridport
