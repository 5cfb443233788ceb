#pragma once

#include <vector>

#include "gridport/apparatus.hpp"
#include "gridport/state_space.hpp"

namespace gridport {

/// u_DQ = T(epsilon) u_dq.
[[nodiscard]] Eigen::Vector2d rotate(double epsilon, const Eigen::Vector2d& u_dq);

/// First-order map (du_dq, deps) -> du_DQ around (epsilon0, u_dq0), returned as
/// the 2x3 matrix [T | T*U0] with U0 = [-u_q0; u_d0].
[[nodiscard]] Eigen::Matrix<double, 2, 3> linearized_rotation(double epsilon0,
                                                              const Eigen::Vector2d& u_dq0);

/// Embeds an apparatus-frame model into the global frame.  One state is
/// appended: the frame angle, integrating the model's speed output scaled by
/// omega_base.  The terminal voltage/current pair is rotated by the operating
/// frame angle, and the operating-point cross terms couple the new state into
/// the terminal ports.  Inputs [v_d, v_q] relabel to [v_D, v_Q] and outputs
/// [i_d, i_q] to [i_D, i_Q]; everything else passes through unchanged.
[[nodiscard]] StateSpaceModel map_to_global(const StateSpaceModel& local,
                                            const OperatingPoint& op, double omega_base);

/// Steady state -> linearize -> map_to_global in one step.
[[nodiscard]] StateSpaceModel global_model(const Apparatus& apparatus, const SteadyState& ss);

/// Closes the grid around the plant with positive feedback: the grid model maps
/// the plant's current outputs to terminal-voltage contributions that add onto
/// the plant's voltage inputs.  Every grid input label must name a plant output
/// and every grid output label a plant input.  The plant's ports survive, so
/// the voltage inputs of the closed model act as series disturbance sources.
[[nodiscard]] StateSpaceModel close_grid(const StateSpaceModel& plant,
                                         const StateSpaceModel& grid);

/// Stacks the embedded apparatus models and closes the grid around them.  The
/// grid model carries bus-level ports: inputs (bus, i_D/i_Q) taking the summed
/// apparatus current injections, outputs (bus, v_D/v_Q) feeding every apparatus
/// on that bus.  The closed model keeps one (bus, v_D/v_Q) disturbance input
/// and one (bus, i_D/i_Q) output per apparatus bus; mechanical inputs and
/// measurement outputs keep their apparatus labels.  apparatus[k] must
/// describe globals[k], and every apparatus bus must appear among the grid
/// ports.
[[nodiscard]] StateSpaceModel assemble_system(const std::vector<Apparatus>& apparatus,
                                              const std::vector<StateSpaceModel>& globals,
                                              const StateSpaceModel& grid);

}  // namespace gridport
