#pragma once

#include <string>
#include <vector>

#include "gridport/apparatus.hpp"
#include "gridport/network.hpp"

namespace gridport {

/// Nonlinear model of the complete circuit in one synchronous frame: every
/// apparatus keeps its local states plus a frame angle, every free bus a
/// voltage pair, every branch and inductive load a current pair.  Inputs are
/// the mechanical-side input of each apparatus followed by the voltage pair of
/// each source bus.  The model is frozen at construction; the state vector is
/// absolute, not a deviation.
struct WholeSystem {
  std::vector<Apparatus> apparatus;
  NetworkData net;
  std::vector<LoadImpedance> loads;
  std::vector<std::string> source_buses;

  // layout
  std::vector<int> ap_offset;      // first local state of each apparatus
  std::vector<int> ap_size;        // local count, angle excluded
  std::vector<int> ap_bus;         // bus index per apparatus
  std::vector<int> bus_state;      // voltage-pair offset per bus, -1 at sources
  std::vector<int> branch_state;   // current-pair offset per branch, -1 if dropped
  std::vector<int> load_state;     // current-pair offset per inductive load entry
  std::vector<int> source_input;   // input offset of each bus' voltage pair, -1 otherwise
  int n_states = 0;
  int n_inputs = 0;

  Eigen::VectorXd x0;  // polished equilibrium
  Eigen::VectorXd u0;  // matching inputs
  std::vector<PortLabel> input_labels;
  std::vector<std::string> state_names;

  [[nodiscard]] int angle_index(int k) const { return ap_offset[k] + ap_size[k]; }
};

/// Assembles the layout and equilibrium from per-apparatus solved steady states
/// and the power-flow voltage profile, then polishes the equilibrium with a
/// damped Newton so the residual is limited by the data consistency, not by
/// the assembly.  Throws NumericalError when no nearby equilibrium exists.
[[nodiscard]] WholeSystem build_whole_system(const std::vector<Apparatus>& apparatus,
                                             const std::vector<SteadyState>& states,
                                             const NetworkData& net,
                                             const std::vector<LoadImpedance>& loads,
                                             const std::vector<std::string>& source_buses,
                                             const Eigen::VectorXd& v_mag,
                                             const Eigen::VectorXd& theta);

[[nodiscard]] Eigen::VectorXd whole_rhs(const WholeSystem& ws, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u);

/// Analytic Jacobian of whole_rhs with respect to x.
[[nodiscard]] Eigen::MatrixXd whole_jacobian(const WholeSystem& ws, const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& u);

/// whole_jacobian at the stored equilibrium: the one-shot reference that the
/// port-assembled small-signal model must reproduce.
[[nodiscard]] Eigen::MatrixXd monolithic_state_matrix(const WholeSystem& ws);

}  // namespace gridport
