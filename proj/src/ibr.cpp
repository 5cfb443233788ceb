#include <cmath>

#include "gridport/apparatus.hpp"

namespace gridport {

void apply_bandwidth_gains(IBRParams& p) {
  const double wc = 2.0 * kPi * p.f_bw_pf;
  const double wci = 2.0 * kPi * p.f_bw_current;
  p.kp_pll = wc / p.omega_base;
  p.ki_pll = wc * wc / (4.0 * p.omega_base);
  p.kp_dc = wc * p.C_dc;
  p.ki_dc = wc * wc * p.C_dc / 4.0;
  p.kp_i = wci * p.L_f / p.omega_base;
  p.ki_i = wci * wci * p.L_f / (4.0 * p.omega_base);
}

// The current controller feeds the measured terminal voltage and the speed
// cross-coupling forward, so the closed filter dynamics reduce to the PI loop
// against R_f; grid coupling enters only through the PLL and the dc link.

Eigen::VectorXd ibr_dynamics(const IBRParams& p, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) {
  const double i_d = x(0), i_q = x(1), gamma_d = x(2), gamma_q = x(3);
  const double v_dc = x(5), gamma_dc = x(6);
  if (!(v_dc > 0.0)) {
    throw NumericalError("inverter dc-link voltage v_dc = " + std::to_string(v_dc) +
                         " left the model domain (must stay positive)");
  }
  const double v_d = u(0), v_q = u(1), i_dc = u(2);
  const double a = p.omega_base / p.L_f;
  const double i_d_ref = p.kp_dc * (v_dc - p.v_dc_ref) + gamma_dc;
  Eigen::VectorXd dx(7);
  dx(0) = a * (p.kp_i * (i_d_ref - i_d) + gamma_d - p.R_f * i_d);
  dx(1) = a * (p.kp_i * (p.i_q_ref - i_q) + gamma_q - p.R_f * i_q);
  dx(2) = p.ki_i * (i_d_ref - i_d);
  dx(3) = p.ki_i * (p.i_q_ref - i_q);
  dx(4) = p.ki_pll * v_q;
  dx(5) = (i_dc - (v_d * i_d + v_q * i_q) / v_dc) / p.C_dc;
  dx(6) = p.ki_dc * (v_dc - p.v_dc_ref);
  return dx;
}

void ibr_jacobians(const IBRParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                   Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
  const double i_d = x(0), i_q = x(1), v_dc = x(5);
  const double v_d = u(0), v_q = u(1);
  const double a = p.omega_base / p.L_f;
  fx = Eigen::MatrixXd::Zero(7, 7);
  fu = Eigen::MatrixXd::Zero(7, 3);
  fx(0, 0) = a * (-p.kp_i - p.R_f);
  fx(0, 2) = a;
  fx(0, 5) = a * p.kp_i * p.kp_dc;
  fx(0, 6) = a * p.kp_i;
  fx(1, 1) = a * (-p.kp_i - p.R_f);
  fx(1, 3) = a;
  fx(2, 0) = -p.ki_i;
  fx(2, 5) = p.ki_i * p.kp_dc;
  fx(2, 6) = p.ki_i;
  fx(3, 1) = -p.ki_i;
  fx(5, 0) = -v_d / (p.C_dc * v_dc);
  fx(5, 1) = -v_q / (p.C_dc * v_dc);
  fx(5, 5) = (v_d * i_d + v_q * i_q) / (p.C_dc * v_dc * v_dc);
  fx(6, 5) = p.ki_dc;
  fu(4, 1) = p.ki_pll;
  fu(5, 0) = -i_d / (p.C_dc * v_dc);
  fu(5, 1) = -i_q / (p.C_dc * v_dc);
  fu(5, 2) = 1.0 / p.C_dc;
}

Eigen::Vector3d ibr_terminal(const IBRParams& p, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) {
  const double omega = 1.0 + p.kp_pll * u(1) + x(4);
  return {x(0), x(1), omega};
}

}  // namespace gridport
