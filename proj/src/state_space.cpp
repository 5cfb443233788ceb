#include "gridport/state_space.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace gridport {

namespace {

const char* kSignalNames[] = {
    "v_D", "v_Q", "i_D", "i_Q", "v_d", "v_q", "i_d",
    "i_q", "T_m", "omega", "i_dc", "v_dc", "theta_pll",
};
constexpr int kNumSignals = sizeof(kSignalNames) / sizeof(kSignalNames[0]);

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string to_string(Signal s) { return kSignalNames[static_cast<int>(s)]; }

Signal signal_from_string(const std::string& name) {
  for (int i = 0; i < kNumSignals; ++i) {
    if (name == kSignalNames[i]) return static_cast<Signal>(i);
  }
  throw ConfigError("unknown signal name '" + name + "'");
}

std::string to_string(const PortLabel& label) {
  return label.apparatus_id + "." + to_string(label.signal);
}

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
                                 Eigen::MatrixXd d, std::vector<PortLabel> inputs,
                                 std::vector<PortLabel> outputs)
    : A(std::move(a)),
      B(std::move(b)),
      C(std::move(c)),
      D(std::move(d)),
      input_labels(std::move(inputs)),
      output_labels(std::move(outputs)) {
  const auto n = A.rows();
  require(A.cols() == n, "state matrix must be square, got " + std::to_string(A.rows()) + "x" +
                             std::to_string(A.cols()));
  require(B.rows() == n, "input map rows (" + std::to_string(B.rows()) +
                             ") must equal state count (" + std::to_string(n) + ")");
  require(C.cols() == n, "output map cols (" + std::to_string(C.cols()) +
                             ") must equal state count (" + std::to_string(n) + ")");
  require(D.rows() == C.rows() && D.cols() == B.cols(),
          "feedthrough must be " + std::to_string(C.rows()) + "x" + std::to_string(B.cols()) +
              ", got " + std::to_string(D.rows()) + "x" + std::to_string(D.cols()));
  require(static_cast<Eigen::Index>(input_labels.size()) == B.cols(),
          "expected " + std::to_string(B.cols()) + " input labels, got " +
              std::to_string(input_labels.size()));
  require(static_cast<Eigen::Index>(output_labels.size()) == C.rows(),
          "expected " + std::to_string(C.rows()) + " output labels, got " +
              std::to_string(output_labels.size()));
  for (size_t i = 0; i < input_labels.size(); ++i) {
    for (size_t j = i + 1; j < input_labels.size(); ++j) {
      require(!(input_labels[i] == input_labels[j]),
              "duplicate input label " + to_string(input_labels[i]));
    }
  }
  for (size_t i = 0; i < output_labels.size(); ++i) {
    for (size_t j = i + 1; j < output_labels.size(); ++j) {
      require(!(output_labels[i] == output_labels[j]),
              "duplicate output label " + to_string(output_labels[i]));
    }
  }
}

Eigen::Index StateSpaceModel::input_index(const PortLabel& label) const {
  for (size_t i = 0; i < input_labels.size(); ++i) {
    if (input_labels[i] == label) return static_cast<Eigen::Index>(i);
  }
  throw ConfigError("no input port labeled " + to_string(label));
}

Eigen::Index StateSpaceModel::output_index(const PortLabel& label) const {
  for (size_t i = 0; i < output_labels.size(); ++i) {
    if (output_labels[i] == label) return static_cast<Eigen::Index>(i);
  }
  throw ConfigError("no output port labeled " + to_string(label));
}

Eigen::MatrixXd balanced_copy(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd m = a;
  const auto n = m.rows();
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = m.col(i).lpNorm<1>() - std::abs(m(i, i));
      double r = m.row(i).lpNorm<1>() - std::abs(m(i, i));
      if (c == 0.0 || r == 0.0) continue;
      const double total = c + r;
      double f = 1.0;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (f != 1.0 && c + r < 0.95 * total) {
        converged = false;
        m.col(i) *= f;
        m.row(i) /= f;
      }
    }
  }
  return m;
}

Eigen::VectorXcd matrix_eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return Eigen::VectorXcd(0);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(balanced_copy(a), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalue iteration failed to converge");
  }
  Eigen::VectorXcd ev = solver.eigenvalues();
  std::vector<std::complex<double>> sorted(ev.data(), ev.data() + ev.size());
  // Sort by real part, ties by |Im|; within a conjugate pair +Im leads.
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    const double ax = std::abs(x.imag());
    const double ay = std::abs(y.imag());
    if (ax != ay) return ax < ay;
    return x.imag() > y.imag();
  });
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = sorted[static_cast<size_t>(i)];
  return ev;
}

Eigen::VectorXcd eigenvalues(const StateSpaceModel& model) { return matrix_eigenvalues(model.A); }

Evaluator::Evaluator(const StateSpaceModel& model)
    : model_(&model), poles_(matrix_eigenvalues(model.A)) {
  double radius = 1.0;
  for (Eigen::Index i = 0; i < poles_.size(); ++i) radius = std::max(radius, std::abs(poles_(i)));
  near_pole_tol_ = 1e-9 * radius;
}

ComplexMatrixAtS Evaluator::at(std::complex<double> s) const {
  for (Eigen::Index i = 0; i < poles_.size(); ++i) {
    if (std::abs(s - poles_(i)) < near_pole_tol_) {
      throw NearPoleError("evaluation point " + std::to_string(s.real()) + "+" +
                              std::to_string(s.imag()) + "j is within tolerance of pole " +
                              std::to_string(poles_(i).real()) + "+" +
                              std::to_string(poles_(i).imag()) + "j",
                          poles_(i));
    }
  }
  const auto n = model_->num_states();
  ComplexMatrixAtS result;
  result.s = s;
  if (n == 0) {
    result.value = model_->D.cast<std::complex<double>>();
    return result;
  }
  Eigen::MatrixXcd resolvent_arg =
      s * Eigen::MatrixXcd::Identity(n, n) - model_->A.cast<std::complex<double>>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(resolvent_arg);
  Eigen::MatrixXcd x = lu.solve(model_->B.cast<std::complex<double>>());
  result.value = model_->C.cast<std::complex<double>>() * x + model_->D.cast<std::complex<double>>();
  return result;
}

ComplexMatrixAtS evaluate(const StateSpaceModel& model, std::complex<double> s) {
  return Evaluator(model).at(s);
}

StateSpaceModel close_feedback(const StateSpaceModel& plant, const StateSpaceModel& feedback,
                               const std::vector<PortLabel>& plant_inputs,
                               const std::vector<PortLabel>& plant_outputs, FeedbackSign sign) {
  const auto nc_in = static_cast<Eigen::Index>(plant_inputs.size());
  const auto nc_out = static_cast<Eigen::Index>(plant_outputs.size());
  if (feedback.num_inputs() != nc_out) {
    throw ConfigError("feedback expects " + std::to_string(feedback.num_inputs()) +
                      " inputs but " + std::to_string(nc_out) + " plant outputs are closed");
  }
  if (feedback.num_outputs() != nc_in) {
    throw ConfigError("feedback produces " + std::to_string(feedback.num_outputs()) +
                      " outputs but " + std::to_string(nc_in) + " plant inputs are closed");
  }

  std::vector<Eigen::Index> in_idx(plant_inputs.size());
  std::vector<Eigen::Index> out_idx(plant_outputs.size());
  for (size_t k = 0; k < plant_inputs.size(); ++k) in_idx[k] = plant.input_index(plant_inputs[k]);
  for (size_t k = 0; k < plant_outputs.size(); ++k)
    out_idx[k] = plant.output_index(plant_outputs[k]);

  const double sgn = (sign == FeedbackSign::positive) ? 1.0 : -1.0;
  const auto np = plant.num_states();
  const auto nf = feedback.num_states();
  const auto m = plant.num_inputs();
  const auto p = plant.num_outputs();

  // Row selection for the closed outputs: yc = cc x_p + dc u.
  Eigen::MatrixXd cc(nc_out, np);
  Eigen::MatrixXd dc(nc_out, m);
  for (Eigen::Index k = 0; k < nc_out; ++k) {
    cc.row(k) = plant.C.row(out_idx[k]);
    dc.row(k) = plant.D.row(out_idx[k]);
  }
  // Scatter of the feedback output into the closed input columns:
  // u = u_ext + sgn S (C_f x_f + D_f yc).
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(m, nc_in);
  for (Eigen::Index k = 0; k < nc_in; ++k) scatter(in_idx[k], k) = 1.0;

  // (I - sgn S D_f dc) u = u_ext + sgn S C_f x_f + sgn S D_f cc x_p
  Eigen::MatrixXd loop = Eigen::MatrixXd::Identity(m, m) - sgn * scatter * feedback.D * dc;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(loop);
  if (!lu.isInvertible()) {
    throw NumericalError(
        "algebraic loop: I - D_feedback * D_plant is singular on the closed ports");
  }
  Eigen::MatrixXd u_x = lu.solve(sgn * scatter * feedback.D * cc);  // m x np
  Eigen::MatrixXd u_f = lu.solve(sgn * scatter * feedback.C);       // m x nf
  Eigen::MatrixXd u_u = lu.solve(Eigen::MatrixXd::Identity(m, m));  // m x m

  Eigen::MatrixXd a_cl(np + nf, np + nf);
  a_cl.topLeftCorner(np, np) = plant.A + plant.B * u_x;
  a_cl.topRightCorner(np, nf) = plant.B * u_f;
  a_cl.bottomLeftCorner(nf, np) = feedback.B * (cc + dc * u_x);
  a_cl.bottomRightCorner(nf, nf) = feedback.A + feedback.B * dc * u_f;

  Eigen::MatrixXd b_cl(np + nf, m);
  b_cl.topRows(np) = plant.B * u_u;
  b_cl.bottomRows(nf) = feedback.B * dc * u_u;

  Eigen::MatrixXd c_cl(p, np + nf);
  c_cl.leftCols(np) = plant.C + plant.D * u_x;
  c_cl.rightCols(nf) = plant.D * u_f;

  Eigen::MatrixXd d_cl = plant.D * u_u;

  return StateSpaceModel(std::move(a_cl), std::move(b_cl), std::move(c_cl), std::move(d_cl),
                         plant.input_labels, plant.output_labels);
}

StateSpaceModel select_ports(const StateSpaceModel& model, const std::vector<PortLabel>& inputs,
                             const std::vector<PortLabel>& outputs) {
  const auto n = model.num_states();
  Eigen::MatrixXd b(n, static_cast<Eigen::Index>(inputs.size()));
  Eigen::MatrixXd c(static_cast<Eigen::Index>(outputs.size()), n);
  Eigen::MatrixXd d(static_cast<Eigen::Index>(outputs.size()),
                    static_cast<Eigen::Index>(inputs.size()));
  std::vector<Eigen::Index> in_idx(inputs.size());
  for (size_t k = 0; k < inputs.size(); ++k) {
    in_idx[k] = model.input_index(inputs[k]);
    b.col(static_cast<Eigen::Index>(k)) = model.B.col(in_idx[k]);
  }
  for (size_t r = 0; r < outputs.size(); ++r) {
    const auto row = model.output_index(outputs[r]);
    c.row(static_cast<Eigen::Index>(r)) = model.C.row(row);
    for (size_t k = 0; k < inputs.size(); ++k) {
      d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = model.D(row, in_idx[k]);
    }
  }
  return StateSpaceModel(model.A, std::move(b), std::move(c), std::move(d), inputs, outputs);
}

StateSpaceModel stack_models(const StateSpaceModel& a, const StateSpaceModel& b) {
  const auto na = a.num_states();
  const auto nb = b.num_states();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(na + nb, na + nb);
  A.topLeftCorner(na, na) = a.A;
  A.bottomRightCorner(nb, nb) = b.A;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(na + nb, a.num_inputs() + b.num_inputs());
  B.topLeftCorner(na, a.num_inputs()) = a.B;
  B.bottomRightCorner(nb, b.num_inputs()) = b.B;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(a.num_outputs() + b.num_outputs(), na + nb);
  C.topLeftCorner(a.num_outputs(), na) = a.C;
  C.bottomRightCorner(b.num_outputs(), nb) = b.C;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(a.num_outputs() + b.num_outputs(),
                                            a.num_inputs() + b.num_inputs());
  D.topLeftCorner(a.num_outputs(), a.num_inputs()) = a.D;
  D.bottomRightCorner(b.num_outputs(), b.num_inputs()) = b.D;
  std::vector<PortLabel> in = a.input_labels;
  in.insert(in.end(), b.input_labels.begin(), b.input_labels.end());
  std::vector<PortLabel> out = a.output_labels;
  out.insert(out.end(), b.output_labels.begin(), b.output_labels.end());
  return StateSpaceModel(std::move(A), std::move(B), std::move(C), std::move(D), std::move(in),
                         std::move(out));
}

}  // namespace gridport
