#include <cmath>
#include <complex>

#include "gridport/apparatus.hpp"
#include "gridport/errors.hpp"

namespace gridport {

int state_count(const ApparatusParams& params) {
  return std::holds_alternative<SGParams>(params) ? 3 : 7;
}

Eigen::VectorXd dynamics(const ApparatusParams& params, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
  return std::visit(
      [&](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SGParams>)
          return sg_dynamics(p, x, u);
        else
          return ibr_dynamics(p, x, u);
      },
      params);
}

void jacobians(const ApparatusParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
               Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
  std::visit(
      [&](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SGParams>)
          sg_jacobians(p, x, u, fx, fu);
        else
          ibr_jacobians(p, x, u, fx, fu);
      },
      params);
}

Eigen::Vector3d terminal(const ApparatusParams& params, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
  return std::visit(
      [&](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SGParams>)
          return sg_terminal(p, x, u);
        else
          return ibr_terminal(p, x, u);
      },
      params);
}

Signal mech_input_signal(const ApparatusParams& params) {
  return std::holds_alternative<SGParams>(params) ? Signal::T_m : Signal::i_dc;
}

namespace {

// max over |state derivative| and terminal constraint mismatch
double point_residual(const ApparatusParams& params, const OperatingPoint& op,
                      const TerminalConstraint& c) {
  const Eigen::VectorXd dx = dynamics(params, op.state, op.input);
  const Eigen::Vector3d y = terminal(params, op.state, op.input);
  const double vd = op.input(0), vq = op.input(1);
  const double perr = c.p - (vd * y(0) + vq * y(1));
  const double qerr = c.q - (vq * y(0) - vd * y(1));
  const double verr = c.v_mag - std::hypot(vd, vq);
  double r = dx.lpNorm<Eigen::Infinity>();
  r = std::max({r, std::abs(perr), std::abs(qerr), std::abs(verr)});
  return r;
}

// Newton on the state at fixed inputs, halving steps until the residual drops.
void polish_state(const ApparatusParams& params, OperatingPoint& op) {
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd f = dynamics(params, op.state, op.input);
    if (f.lpNorm<Eigen::Infinity>() < 1e-12) return;
    Eigen::MatrixXd fx, fu;
    jacobians(params, op.state, op.input, fx, fu);
    Eigen::VectorXd step = fx.fullPivLu().solve(-f);
    double alpha = 1.0;
    for (int half = 0; half < 30; ++half) {
      Eigen::VectorXd cand = op.state + alpha * step;
      if (dynamics(params, cand, op.input).lpNorm<Eigen::Infinity>() <
          f.lpNorm<Eigen::Infinity>()) {
        op.state = cand;
        break;
      }
      alpha *= 0.5;
    }
  }
}

SteadyState solve_sg(const Apparatus& apparatus, const TerminalConstraint& c) {
  SGParams p = std::get<SGParams>(apparatus.params);
  // terminal-aligned phasors; the internal voltage fixes the field flux and the
  // frame rotation (d axis on the field)
  const std::complex<double> i_term = std::complex<double>(c.p, -c.q) / c.v_mag;
  const std::complex<double> e = c.v_mag + std::complex<double>(p.R, p.L) * i_term;
  p.psi_f = std::abs(e);
  const double rot = std::arg(e);
  const std::complex<double> spin = std::polar(1.0, -rot);
  const std::complex<double> v = c.v_mag * spin;
  const std::complex<double> i = i_term * spin;

  OperatingPoint op;
  op.i_d0 = i.real();
  op.i_q0 = i.imag();
  op.epsilon0 = c.theta_v + rot;
  op.state = Eigen::Vector3d(-p.L * op.i_d0, -p.L * op.i_q0 - p.psi_f, 1.0);
  op.input = Eigen::Vector3d(v.real(), v.imag(), p.psi_f * op.i_d0 + p.K_D);

  ApparatusParams params = p;
  op.residual = point_residual(params, op, c);
  if (op.residual > 1e-11) {
    polish_state(params, op);
    op.residual = point_residual(params, op, c);
  }
  return {params, op};
}

SteadyState solve_ibr(const Apparatus& apparatus, const TerminalConstraint& c) {
  IBRParams p = std::get<IBRParams>(apparatus.params);
  OperatingPoint op;
  op.i_d0 = c.p / c.v_mag;
  op.i_q0 = -c.q / c.v_mag;
  op.epsilon0 = c.theta_v;  // PLL locks the d axis onto the terminal voltage
  p.i_q_ref = op.i_q0;

  Eigen::VectorXd x(7);
  x << op.i_d0, op.i_q0, p.R_f * op.i_d0, p.R_f * op.i_q0, 0.0, p.v_dc_ref, op.i_d0;
  op.state = x;
  op.input = Eigen::Vector3d(c.v_mag, 0.0, c.p / p.v_dc_ref);

  ApparatusParams params = p;
  op.residual = point_residual(params, op, c);
  if (op.residual > 1e-11) {
    polish_state(params, op);
    op.residual = point_residual(params, op, c);
  }
  return {params, op};
}

}  // namespace

SteadyState solve_steady_state(const Apparatus& apparatus, const TerminalConstraint& constraint) {
  if (!(constraint.v_mag > 0.0)) {
    throw NumericalError("no steady state for apparatus " + apparatus.id +
                         ": terminal voltage magnitude must be positive, got " +
                         std::to_string(constraint.v_mag));
  }
  SteadyState ss = std::holds_alternative<SGParams>(apparatus.params)
                       ? solve_sg(apparatus, constraint)
                       : solve_ibr(apparatus, constraint);
  if (!(ss.op.residual < 1e-8)) {
    throw NumericalError("no steady state for apparatus " + apparatus.id + ": residual " +
                         std::to_string(ss.op.residual) + " after polish");
  }
  return ss;
}

void terminal_jacobians(const ApparatusParams& params, Eigen::MatrixXd& cy,
                        Eigen::MatrixXd& dy) {
  if (const auto* sg = std::get_if<SGParams>(&params)) {
    cy = Eigen::MatrixXd::Zero(3, 3);
    dy = Eigen::MatrixXd::Zero(3, 3);
    cy(0, 0) = -1.0 / sg->L;
    cy(1, 1) = -1.0 / sg->L;
    cy(2, 2) = 1.0;
  } else {
    const auto& ibr = std::get<IBRParams>(params);
    cy = Eigen::MatrixXd::Zero(3, 7);
    dy = Eigen::MatrixXd::Zero(3, 3);
    cy(0, 0) = 1.0;
    cy(1, 1) = 1.0;
    cy(2, 4) = 1.0;          // PLL integrator contributes to the frequency output
    dy(2, 1) = ibr.kp_pll;   // plus the proportional path straight from v_q
  }
}

StateSpaceModel linearize(const Apparatus& apparatus, const OperatingPoint& op) {
  Eigen::MatrixXd fx, fu;
  jacobians(apparatus.params, op.state, op.input, fx, fu);

  const auto n = fx.rows();
  std::vector<PortLabel> inputs = {{apparatus.id, Signal::v_d},
                                   {apparatus.id, Signal::v_q},
                                   {apparatus.id, mech_input_signal(apparatus.params)}};
  std::vector<PortLabel> outputs = {{apparatus.id, Signal::i_d},
                                    {apparatus.id, Signal::i_q},
                                    {apparatus.id, Signal::omega}};

  Eigen::MatrixXd cy, dy;
  terminal_jacobians(apparatus.params, cy, dy);
  Eigen::MatrixXd cmat = cy, dmat = dy;
  if (std::holds_alternative<IBRParams>(apparatus.params)) {
    cmat.conservativeResize(4, n);
    cmat.row(3).setZero();
    cmat(3, 5) = 1.0;  // dc-link voltage as an extra measurement
    dmat.conservativeResize(4, 3);
    dmat.row(3).setZero();
    outputs.push_back({apparatus.id, Signal::v_dc});
  }
  return StateSpaceModel(fx, fu, cmat, dmat, std::move(inputs), std::move(outputs));
}

}  // namespace gridport
