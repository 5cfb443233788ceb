#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "gridport/errors.hpp"

namespace gridport {

inline constexpr double kPi = 3.14159265358979323846;

// ===== port labels =====

/// Signal kinds a port can carry.  Global-frame electrical signals use upper-case
/// axis suffixes, local (apparatus-frame) ones lower-case.
enum class Signal {
  v_D,
  v_Q,
  i_D,
  i_Q,
  v_d,
  v_q,
  i_d,
  i_q,
  T_m,
  omega,
  i_dc,
  v_dc,
  theta_pll,
};

[[nodiscard]] std::string to_string(Signal s);
[[nodiscard]] Signal signal_from_string(const std::string& name);

/// A port is identified by the apparatus (or bus) it belongs to plus its signal kind.
struct PortLabel {
  std::string apparatus_id;
  Signal signal{Signal::v_d};

  bool operator==(const PortLabel&) const = default;
};

[[nodiscard]] std::string to_string(const PortLabel& label);

// ===== model =====

/// Linear time-invariant model  x' = A x + B u,  y = C x + D u  with labeled ports.
/// Immutable after construction; all operations return new models.
struct StateSpaceModel {
  Eigen::MatrixXd A;  ///< n x n state matrix
  Eigen::MatrixXd B;  ///< n x m input map
  Eigen::MatrixXd C;  ///< p x n output map
  Eigen::MatrixXd D;  ///< p x m feedthrough
  std::vector<PortLabel> input_labels;
  std::vector<PortLabel> output_labels;

  StateSpaceModel() = default;
  StateSpaceModel(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd d,
                  std::vector<PortLabel> inputs, std::vector<PortLabel> outputs);

  [[nodiscard]] Eigen::Index num_states() const { return A.rows(); }
  [[nodiscard]] Eigen::Index num_inputs() const { return B.cols(); }
  [[nodiscard]] Eigen::Index num_outputs() const { return C.rows(); }

  /// Index of an input port; throws ConfigError naming the label if absent.
  [[nodiscard]] Eigen::Index input_index(const PortLabel& label) const;
  /// Index of an output port; throws ConfigError naming the label if absent.
  [[nodiscard]] Eigen::Index output_index(const PortLabel& label) const;
};

/// Transfer matrix value at one complex frequency.
struct ComplexMatrixAtS {
  std::complex<double> s;
  Eigen::MatrixXcd value;
};

// ===== operations =====

/// Similarity-transform a matrix by diagonal powers of two so row/column norms agree.
/// Eigenvalues are unchanged; accuracy of the subsequent QR iteration improves.
[[nodiscard]] Eigen::MatrixXd balanced_copy(const Eigen::MatrixXd& a);

/// All eigenvalues of the state matrix, sorted by real part (ties by imaginary part)
/// with conjugate pairs adjacent, +Im first.
[[nodiscard]] Eigen::VectorXcd eigenvalues(const StateSpaceModel& model);

/// Eigenvalues of a bare matrix with the same balancing and ordering.
[[nodiscard]] Eigen::VectorXcd matrix_eigenvalues(const Eigen::MatrixXd& a);

/// Evaluates one model at many frequencies; the pole set is computed once.
class Evaluator {
 public:
  explicit Evaluator(const StateSpaceModel& model);

  /// D + C (sI - A)^-1 B.  Throws NearPoleError if s is within
  /// 1e-9 * max(1, spectral radius) of a pole.
  [[nodiscard]] ComplexMatrixAtS at(std::complex<double> s) const;

  [[nodiscard]] const Eigen::VectorXcd& poles() const { return poles_; }

 private:
  const StateSpaceModel* model_;
  Eigen::VectorXcd poles_;
  double near_pole_tol_;
};

/// One-shot evaluation; prefer Evaluator when sampling many frequencies.
[[nodiscard]] ComplexMatrixAtS evaluate(const StateSpaceModel& model, std::complex<double> s);

enum class FeedbackSign {
  positive,  ///< u_closed = u_ext + F(y)
  negative,  ///< u_closed = u_ext - F(y)
};

/// Closes feedback from the named plant outputs through `feedback` back into the
/// named plant inputs, stacking states (never manipulating rational forms).
/// The closed inputs remain available as external inputs; all plant ports survive
/// with their labels.  Throws NumericalError on a singular algebraic loop.
[[nodiscard]] StateSpaceModel close_feedback(const StateSpaceModel& plant,
                                             const StateSpaceModel& feedback,
                                             const std::vector<PortLabel>& plant_inputs,
                                             const std::vector<PortLabel>& plant_outputs,
                                             FeedbackSign sign);

/// Restriction of a model to the requested ports, in the requested order.
[[nodiscard]] StateSpaceModel select_ports(const StateSpaceModel& model,
                                           const std::vector<PortLabel>& inputs,
                                           const std::vector<PortLabel>& outputs);

/// Block-diagonal combination of two models; labels are concatenated and must stay unique.
[[nodiscard]] StateSpaceModel stack_models(const StateSpaceModel& a, const StateSpaceModel& b);

}  // namespace gridport
