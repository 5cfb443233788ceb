#include <cmath>

#include "gridport/apparatus.hpp"

namespace gridport {

// currents follow from flux: i_d = -psi_d/L, i_q = -(psi_q + psi_f)/L

Eigen::VectorXd sg_dynamics(const SGParams& p, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u) {
  const double psi_d = x(0), psi_q = x(1), omega = x(2);
  const double v_d = u(0), v_q = u(1), t_m = u(2);
  const double i_d = -psi_d / p.L;
  const double i_q = -(psi_q + p.psi_f) / p.L;
  const double t_e = p.psi_f * i_d;
  Eigen::VectorXd dx(3);
  dx(0) = p.omega_base * (v_d + p.R * i_d + omega * psi_q);
  dx(1) = p.omega_base * (v_q + p.R * i_q - omega * psi_d);
  dx(2) = (t_m - t_e - p.K_D * omega) / p.J;
  return dx;
}

void sg_jacobians(const SGParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
  (void)u;
  const double psi_d = x(0), psi_q = x(1), omega = x(2);
  const double wb = p.omega_base;
  fx = Eigen::MatrixXd::Zero(3, 3);
  fu = Eigen::MatrixXd::Zero(3, 3);
  fx(0, 0) = -wb * p.R / p.L;
  fx(0, 1) = wb * omega;
  fx(0, 2) = wb * psi_q;
  fx(1, 0) = -wb * omega;
  fx(1, 1) = -wb * p.R / p.L;
  fx(1, 2) = -wb * psi_d;
  fx(2, 0) = p.psi_f / (p.L * p.J);
  fx(2, 2) = -p.K_D / p.J;
  fu(0, 0) = wb;
  fu(1, 1) = wb;
  fu(2, 2) = 1.0 / p.J;
}

Eigen::Vector3d sg_terminal(const SGParams& p, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u) {
  (void)u;
  return {-x(0) / p.L, -(x(1) + p.psi_f) / p.L, x(2)};
}

double sg_torque(const SGParams& p, const Eigen::VectorXd& x) {
  return p.psi_f * (-x(0) / p.L);
}

}  // namespace gridport
