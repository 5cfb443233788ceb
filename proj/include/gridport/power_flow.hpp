#pragma once

#include <vector>

#include "gridport/network.hpp"

namespace gridport {

struct PowerFlowSolution {
  Eigen::VectorXd v_mag;   // per bus, pu
  Eigen::VectorXd theta;   // per bus, rad
  Eigen::VectorXd p_inj;   // solved net injection per bus
  Eigen::VectorXd q_inj;
  Eigen::VectorXd p_from;  // per branch, sending-end power into the branch
  Eigen::VectorXd q_from;
  Eigen::VectorXd p_to;    // receiving-end power into the branch
  Eigen::VectorXd q_to;
  int iterations = 0;
  std::vector<double> residuals;  // infinity-norm mismatch per iteration
};

/// Newton-Raphson in polar form on the phasor admittance at nominal frequency.
/// Scheduled injections come from the bus specs (generation minus load); slack
/// covers the balance and PV buses hold their magnitude.  Converges when the
/// mismatch drops below 1e-8, fails after 30 iterations with the residual
/// history in the error message.
[[nodiscard]] PowerFlowSolution solve_power_flow(const NetworkData& net);

}  // namespace gridport
