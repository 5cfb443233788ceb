#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "gridport/state_space.hpp"

namespace gridport {

// ===== synchronous generator =====

/// Electromechanical machine: stator flux pair plus rotor speed, source convention
/// (positive current flows out of the terminal).
struct SGParams {
  double J = 7.0;      ///< rotor inertia, pu*s
  double K_D = 1.0;    ///< damping torque coefficient, pu torque per pu speed
  double R = 0.01;     ///< stator resistance, pu
  double L = 0.15;     ///< stator inductance, pu
  double psi_f = 1.0;  ///< field flux linkage, pu; steady-state solves recompute it
  double omega_base = 2.0 * kPi * 60.0;  ///< electrical speed of 1 pu, rad/s
};

// ===== grid-following inverter =====

/// Current-controlled converter behind an R_f/L_f filter, synchronized by a PLL,
/// with a dc-link voltage loop commanding the d-axis current.
struct IBRParams {
  double L_f = 0.05;    ///< filter inductance, pu
  double R_f = 0.005;   ///< filter resistance, pu
  double C_dc = 0.1;    ///< dc-link capacitance, pu*s (electrical inertia)
  double v_dc_ref = 1.0;
  double i_q_ref = 0.0;  ///< reactive current setpoint, set by the steady-state solve
  double kp_pll = 0.0, ki_pll = 0.0;
  double kp_i = 0.0, ki_i = 0.0;
  double kp_dc = 0.0, ki_dc = 0.0;
  double f_bw_pf = 25.0;       ///< power-frequency loop bandwidth knob, Hz (PLL + dc loop)
  double f_bw_current = 250.0; ///< current loop bandwidth knob, Hz
  double omega_base = 2.0 * kPi * 60.0;
};

/// Fills the six controller gains from the two bandwidth knobs:
/// kp = wc * m and ki = wc^2 * m / 4 with m the plant inertia seen by each loop
/// (1/omega_base for the PLL, C_dc for the dc loop, L_f/omega_base for the current loop).
void apply_bandwidth_gains(IBRParams& p);

using ApparatusParams = std::variant<SGParams, IBRParams>;

/// An apparatus instance: parameters bound to a name and a bus.
struct Apparatus {
  std::string id;
  std::string bus;
  ApparatusParams params;
};

// ===== operating point =====

/// Equilibrium of one apparatus in its own frame plus its frame angle.
struct OperatingPoint {
  Eigen::VectorXd state;  ///< equilibrium state vector
  Eigen::VectorXd input;  ///< equilibrium inputs [v_d, v_q, mech]
  double i_d0 = 0.0;
  double i_q0 = 0.0;
  double epsilon0 = 0.0;  ///< frame angle relative to the global frame, rad
  double residual = 0.0;  ///< max-norm of the state derivative at the point
};

/// Terminal condition a steady state must meet: active/reactive power delivered
/// into the network and voltage magnitude/angle in the global frame.
struct TerminalConstraint {
  double p = 0.0;
  double q = 0.0;
  double v_mag = 1.0;
  double theta_v = 0.0;
};

/// Steady-state solve result; params may be recalibrated (SG field flux).
struct SteadyState {
  ApparatusParams params;
  OperatingPoint op;
};

// ===== dynamics =====
// State layouts:
//   SG:  [psi_d, psi_q, omega]
//   IBR: [i_d, i_q, gamma_d, gamma_q, x_pll, v_dc, gamma_dc]
// Inputs are always [v_d, v_q, mech] with mech = T_m (SG) or i_dc (IBR).

[[nodiscard]] Eigen::VectorXd sg_dynamics(const SGParams& p, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u);
[[nodiscard]] Eigen::VectorXd ibr_dynamics(const IBRParams& p, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& u);

/// d(state derivative)/d(state) and /d(input), evaluated analytically.
void sg_jacobians(const SGParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  Eigen::MatrixXd& fx, Eigen::MatrixXd& fu);
void ibr_jacobians(const IBRParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                   Eigen::MatrixXd& fx, Eigen::MatrixXd& fu);

/// Terminal current [i_d, i_q] and the speed-like quantity (rotor speed or PLL
/// frequency, pu) produced by the apparatus at this state/input.
[[nodiscard]] Eigen::Vector3d sg_terminal(const SGParams& p, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u);
[[nodiscard]] Eigen::Vector3d ibr_terminal(const IBRParams& p, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& u);

/// Air-gap torque of the machine (pu).
[[nodiscard]] double sg_torque(const SGParams& p, const Eigen::VectorXd& x);

// ===== generic dispatch =====

[[nodiscard]] int state_count(const ApparatusParams& params);
[[nodiscard]] Eigen::VectorXd dynamics(const ApparatusParams& params, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u);
void jacobians(const ApparatusParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
               Eigen::MatrixXd& fx, Eigen::MatrixXd& fu);
[[nodiscard]] Eigen::Vector3d terminal(const ApparatusParams& params, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u);
[[nodiscard]] Signal mech_input_signal(const ApparatusParams& params);

/// Solves the apparatus equilibrium meeting the terminal constraint.  Closed-form
/// solve, then verification; a damped Newton polish (at most 50 steps) engages if
/// the closed form is imperfect.  Throws NumericalError naming the apparatus when
/// no steady state exists.
[[nodiscard]] SteadyState solve_steady_state(const Apparatus& apparatus,
                                             const TerminalConstraint& constraint);

/// Small-signal model in the apparatus frame.
/// Inputs [v_d, v_q, mech]; outputs [i_d, i_q, omega] plus v_dc for an inverter.
[[nodiscard]] StateSpaceModel linearize(const Apparatus& apparatus, const OperatingPoint& op);

/// Derivatives of the terminal map [i_d, i_q, omega] with respect to the state
/// (cy) and the input [v_d, v_q, mech] (dy).  Constant for both apparatus kinds.
void terminal_jacobians(const ApparatusParams& params, Eigen::MatrixXd& cy,
                        Eigen::MatrixXd& dy);

}  // namespace gridport
