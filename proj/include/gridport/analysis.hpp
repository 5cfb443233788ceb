#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "gridport/apparatus.hpp"
#include "gridport/state_space.hpp"

namespace gridport {

enum class PortKind { torque, dc_current };

/// Frequency-domain coefficient seen from one apparatus port of the closed
/// system, with the port's own storage term split off: K(s) + s * inertia is
/// the exact inverse of the closed port transfer.  For a machine the port is
/// torque -> speed and the storage is the rotor inertia; for an inverter it is
/// dc current -> dc voltage and the storage is the dc-link capacitance.
struct PortCoefficient {
  PortKind kind = PortKind::torque;
  std::string apparatus_id;
  double inertia = 0.0;
  std::vector<std::complex<double>> s_samples;
  std::vector<std::complex<double>> values;   ///< K at each sample
  StateSpaceModel realization;                ///< state-space form of K(s)
};

/// Coefficient at the machine's torque port.  `samples` may be empty; the
/// state-space form is always produced.  Throws ConfigError when the apparatus
/// is not a machine or its ports are missing from the model, NumericalError
/// when the port transfer does not lead with 1/(s * inertia), NearPoleError
/// when a sample sits on a closed-loop pole.
[[nodiscard]] PortCoefficient torque_coefficient(
    const StateSpaceModel& closed, const Apparatus& sg,
    const std::vector<std::complex<double>>& samples);

/// Coefficient at the inverter's dc port, same contract.
[[nodiscard]] PortCoefficient dc_current_coefficient(
    const StateSpaceModel& closed, const Apparatus& ibr,
    const std::vector<std::complex<double>>& samples);

/// Coefficient read at one mode frequency.  `stable` is the quadrant test
/// phase > -90 degrees; `k_td` is the damping component Re K.  Requires the
/// coefficient's own dynamics to be stable (ignoring the structural integrator
/// the inversion always carries); otherwise IndexInapplicableError.
struct PhaseMarginIndex {
  double phase_deg = 0.0;
  bool stable = false;
  double k_td = 0.0;
};

[[nodiscard]] PhaseMarginIndex phase_margin_index(const PortCoefficient& coeff,
                                                  double mode_freq_hz);

/// One grid point of a parameter sweep.  `mode_ids` aligns with `poles` and
/// carries the identity of each mode across the sweep; a failed point keeps
/// its error text and an empty pole set.
struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  Eigen::VectorXcd poles;
  std::vector<int> mode_ids;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;
};

/// Evaluates `poles_at` over a strictly monotone grid and threads mode
/// identities through nearest-neighbor matching between consecutive points.
/// Exceptions from the callback are recorded per point, not rethrown.
[[nodiscard]] SweepResult pole_sweep(const std::string& parameter,
                                     const std::vector<double>& grid,
                                     const std::function<Eigen::VectorXcd(double)>& poles_at);

/// Magnitude peak of one machine's own torque->speed transfer near a mode.
/// `participating` means the peak is interior to the scanned band rather than
/// a monotone edge.
struct ParticipationEntry {
  std::string apparatus_id;
  double peak_db = 0.0;
  double peak_freq_hz = 0.0;
  bool participating = false;
};

struct ParticipationReport {
  double mode_freq_hz = 0.0;
  std::vector<ParticipationEntry> ranking;  ///< descending peak, participants first
};

[[nodiscard]] ParticipationReport participation_screen(const StateSpaceModel& closed,
                                                       const std::vector<std::string>& sg_ids,
                                                       double mode_freq_hz);

/// One row of a frequency-response table.  Phase is unwrapped along the grid
/// so adjacent rows never jump by a full turn.
struct BodePoint {
  double freq_hz = 0.0;
  std::complex<double> value;
  double magnitude_db = 0.0;
  double phase_deg = 0.0;
};

[[nodiscard]] std::vector<BodePoint> frequency_response_table(const StateSpaceModel& model,
                                                              const PortLabel& input,
                                                              const PortLabel& output,
                                                              const std::vector<double>& freq_hz);

/// Index of the least-damped pole whose frequency falls in the
/// electromechanical band (0.1 to 15 Hz); -1 when the band is empty.
[[nodiscard]] int swing_mode_index(const Eigen::VectorXcd& poles);

}  // namespace gridport
