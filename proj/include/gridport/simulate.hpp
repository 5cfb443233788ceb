#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gridport/state_space.hpp"
#include "gridport/whole_system.hpp"

namespace gridport {

/// Sets one input channel to a new value at a point in time.  The change lands
/// on the integration grid point nearest the requested time and stays until a
/// later event overrides it.
struct InputStepEvent {
  double time = 0.0;
  int input = 0;
  double value = 0.0;
};

struct SimOptions {
  double dt = 5e-5;               ///< integration step, s
  double divergence_limit = 1e6;  ///< any |state| beyond this marks the run diverged
  int record_every = 1;           ///< sample decimation factor
  std::vector<int> probes;        ///< recorded columns; empty records everything
};

/// Uniformly sampled run.  A diverged run keeps its samples up to the last
/// finite state; nothing after diverged_at is recorded.
struct SimTrace {
  std::vector<double> time;
  Eigen::MatrixXd samples;  ///< one row per instant, one column per probe
  std::vector<std::string> columns;
  bool diverged = false;
  double diverged_at = 0.0;
};

/// A stretch of simulated time governed by one model.  Consecutive segments
/// must share the state and input layout; the state carries over unchanged at
/// the boundary, which is how parameter steps enter a run.
struct SimSegment {
  const WholeSystem* system = nullptr;
  double t_end = 0.0;
};

/// Fixed-step 4th-order integration of the whole-system dynamics from an
/// absolute initial state.  Events apply between steps.  Probe indices select
/// states; columns are named after them.  A state leaving the model domain or
/// exceeding the divergence limit stops the run with the diverged flag set.
[[nodiscard]] SimTrace simulate_nonlinear(const std::vector<SimSegment>& segments,
                                          const Eigen::VectorXd& x_init,
                                          const Eigen::VectorXd& u_init,
                                          std::vector<InputStepEvent> events,
                                          const SimOptions& options = {});

/// Exact zero-order-hold discretization of a linear model at the option step.
/// The state and inputs are deviations from the model's operating point; probe
/// indices select outputs, and samples are the output values at each instant.
[[nodiscard]] SimTrace simulate_linear(const StateSpaceModel& model,
                                       const Eigen::VectorXd& x_init,
                                       const Eigen::VectorXd& u_init, double t_end,
                                       std::vector<InputStepEvent> events,
                                       const SimOptions& options = {});

// ===== sinusoidal injection scan =====

struct ScanOptions {
  double amplitude = 1e-4;      ///< injected voltage magnitude, pu
  double dt = 5e-5;             ///< integration step upper bound; rounded to the cycle
  int settle_cycles = 4;        ///< cycles discarded before measuring
  int window_cycles = 4;        ///< cycles per measurement window
  double consistency_tol = 2e-3;  ///< relative disagreement allowed between windows
  int max_settle_rounds = 3;    ///< extra settling attempts before giving up
};

/// A circuit driven by a two-axis terminal voltage, producing a two-axis
/// current.  The linearization (a, b) at the rest point seeds the integration
/// near the periodic orbit and gates unstable plants out of the scan.
struct DrivenOde {
  Eigen::VectorXd x0;  ///< rest state
  Eigen::Vector2d v0 = Eigen::Vector2d::Zero();  ///< rest terminal voltage
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::Vector2d&)> rhs;
  std::function<Eigen::Vector2d(const Eigen::VectorXd&, const Eigen::Vector2d&)> current;
  Eigen::MatrixXd a;  ///< d(rhs)/dx at rest
  Eigen::MatrixXd b;  ///< d(rhs)/dv at rest, n x 2
};

/// Measures the 2x2 admittance seen at the terminal by injecting a sinusoid on
/// each axis in turn and projecting the current onto the drive frequency over
/// an integer number of cycles.  Consecutive windows must agree, else the run
/// settles longer; persistent disagreement raises NumericalError.  An unstable
/// plant raises IndexInapplicableError.
[[nodiscard]] Eigen::Matrix2cd measure_admittance(const DrivenOde& ode, double freq_hz,
                                                  const ScanOptions& options = {});

/// Wraps one apparatus (with its frame angle) as a DrivenOde at its solved
/// operating point and measures its global-frame terminal admittance.
[[nodiscard]] Eigen::Matrix2cd measure_apparatus_admittance(const Apparatus& apparatus,
                                                            const SteadyState& ss,
                                                            double freq_hz,
                                                            const ScanOptions& options = {});

}  // namespace gridport
