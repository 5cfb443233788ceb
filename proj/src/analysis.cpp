#include "gridport/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridport/errors.hpp"

namespace gridport {

namespace {

using cplx = std::complex<double>;

// Inverse-minus-storage of a strictly proper SISO transfer c (sI-A)^-1 b whose
// leading coefficient c*b equals 1/inertia.  With j = inertia and the port
// output y, the state z = x - b*j*y evolves autonomously under
// A_k = (I - b*j*c) A, which is why the form always carries one integrator of
// its own: b*j*c is idempotent, so A_k is singular by construction.
StateSpaceModel inverse_minus_storage(const StateSpaceModel& siso, double inertia,
                                      const PortLabel& in, const PortLabel& out) {
  const Eigen::VectorXd b = siso.B.col(0);
  const Eigen::RowVectorXd ca = siso.C.row(0) * siso.A;
  const Eigen::MatrixXd a_k = siso.A - b * (inertia * ca);
  const Eigen::VectorXd b_k = a_k * (b * inertia);
  const Eigen::RowVectorXd c_k = -inertia * ca;
  Eigen::MatrixXd d_k(1, 1);
  d_k << -inertia * ca.dot(b) * inertia;
  return {a_k, b_k, c_k, d_k, {in}, {out}};
}

PortCoefficient make_coefficient(const StateSpaceModel& closed, const std::string& id,
                                 PortKind kind, double inertia, const char* port_name,
                                 const PortLabel& mech_in, const PortLabel& storage_out,
                                 const std::vector<cplx>& samples) {
  const StateSpaceModel siso = select_ports(closed, {mech_in}, {storage_out});
  const double d = siso.D(0, 0);
  const double lead = siso.C.row(0).dot(siso.B.col(0)) * inertia;
  if (std::abs(d) > 1e-9 || std::abs(lead - 1.0) > 1e-6) {
    throw NumericalError("the " + std::string(port_name) + " port of " + id +
                         " does not lead with 1/(s*" + std::to_string(inertia) +
                         "): feedthrough " + std::to_string(d) + ", c*b*inertia " +
                         std::to_string(lead));
  }

  PortCoefficient coeff;
  coeff.kind = kind;
  coeff.apparatus_id = id;
  coeff.inertia = inertia;
  coeff.s_samples = samples;
  coeff.realization = inverse_minus_storage(siso, inertia, storage_out, mech_in);
  if (!samples.empty()) {
    Evaluator ev(siso);
    coeff.values.reserve(samples.size());
    for (const cplx& s : samples) {
      const cplx g = ev.at(s).value(0, 0);
      coeff.values.push_back(1.0 / g - s * inertia);
    }
  }
  return coeff;
}

}  // namespace

PortCoefficient torque_coefficient(const StateSpaceModel& closed, const Apparatus& sg,
                                   const std::vector<cplx>& samples) {
  const auto* params = std::get_if<SGParams>(&sg.params);
  if (params == nullptr) {
    throw ConfigError("torque coefficient needs a synchronous machine, but " + sg.id +
                      " is an inverter");
  }
  return make_coefficient(closed, sg.id, PortKind::torque, params->J, "torque",
                          {sg.id, Signal::T_m}, {sg.id, Signal::omega}, samples);
}

PortCoefficient dc_current_coefficient(const StateSpaceModel& closed, const Apparatus& ibr,
                                       const std::vector<cplx>& samples) {
  const auto* params = std::get_if<IBRParams>(&ibr.params);
  if (params == nullptr) {
    throw ConfigError("dc-current coefficient needs an inverter, but " + ibr.id +
                      " is a synchronous machine");
  }
  return make_coefficient(closed, ibr.id, PortKind::dc_current, params->C_dc, "dc",
                          {ibr.id, Signal::i_dc}, {ibr.id, Signal::v_dc}, samples);
}

PhaseMarginIndex phase_margin_index(const PortCoefficient& coeff, double mode_freq_hz) {
  if (!(mode_freq_hz > 0.0)) {
    throw ConfigError("the mode frequency for the phase reading must be positive");
  }
  if (coeff.realization.num_states() > 0) {
    const Eigen::VectorXcd modes = matrix_eigenvalues(coeff.realization.A);
    const double scale = std::max(1.0, modes.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < modes.size(); ++i) {
      if (std::abs(modes(i)) < 1e-6 * scale) continue;  // structural integrator
      if (modes(i).real() > 1e-9 * scale) {
        throw IndexInapplicableError(
            "the coefficient for " + coeff.apparatus_id + " has an unstable pole at " +
            std::to_string(modes(i).real()) + " + " + std::to_string(modes(i).imag()) +
            "i 1/s; its phase does not measure a margin there");
      }
    }
  }
  const cplx s(0.0, 2.0 * kPi * mode_freq_hz);
  const cplx k = evaluate(coeff.realization, s).value(0, 0);
  PhaseMarginIndex idx;
  idx.phase_deg = std::atan2(k.imag(), k.real()) * 180.0 / kPi;
  idx.stable = idx.phase_deg > -90.0;
  idx.k_td = k.real();
  return idx;
}

SweepResult pole_sweep(const std::string& parameter, const std::vector<double>& grid,
                       const std::function<Eigen::VectorXcd(double)>& poles_at) {
  if (grid.empty()) throw ConfigError("the sweep grid for " + parameter + " is empty");
  const bool rising = grid.size() < 2 || grid[1] > grid[0];
  for (size_t k = 1; k < grid.size(); ++k) {
    if ((rising && grid[k] <= grid[k - 1]) || (!rising && grid[k] >= grid[k - 1])) {
      throw ConfigError("the sweep grid for " + parameter + " must be strictly monotone");
    }
  }

  SweepResult result;
  result.parameter = parameter;
  result.points.reserve(grid.size());

  Eigen::VectorXcd ref_poles;
  std::vector<int> ref_ids;
  int next_id = 0;

  for (const double value : grid) {
    SweepPoint pt;
    pt.value = value;
    try {
      pt.poles = poles_at(value);
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    if (pt.ok) {
      const Eigen::Index n = pt.poles.size();
      pt.mode_ids.assign(static_cast<size_t>(n), -1);
      if (ref_ids.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) pt.mode_ids[static_cast<size_t>(i)] = next_id++;
      } else {
        // greedy globally-nearest matching against the last successful point
        struct Pair {
          double dist;
          Eigen::Index cur, ref;
        };
        std::vector<Pair> pairs;
        pairs.reserve(static_cast<size_t>(n * ref_poles.size()));
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < ref_poles.size(); ++j) {
            const double d =
                std::abs(pt.poles(i) - ref_poles(j)) / std::max(1.0, std::abs(ref_poles(j)));
            pairs.push_back({d, i, j});
          }
        }
        std::sort(pairs.begin(), pairs.end(),
                  [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
        std::vector<bool> ref_used(static_cast<size_t>(ref_poles.size()), false);
        for (const Pair& p : pairs) {
          if (pt.mode_ids[static_cast<size_t>(p.cur)] >= 0 ||
              ref_used[static_cast<size_t>(p.ref)]) {
            continue;
          }
          pt.mode_ids[static_cast<size_t>(p.cur)] = ref_ids[static_cast<size_t>(p.ref)];
          ref_used[static_cast<size_t>(p.ref)] = true;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          if (pt.mode_ids[static_cast<size_t>(i)] < 0) {
            pt.mode_ids[static_cast<size_t>(i)] = next_id++;
          }
        }
      }
      ref_poles = pt.poles;
      ref_ids = pt.mode_ids;
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

ParticipationReport participation_screen(const StateSpaceModel& closed,
                                         const std::vector<std::string>& sg_ids,
                                         double mode_freq_hz) {
  if (!(mode_freq_hz > 0.0)) {
    throw ConfigError("the participation screen needs a positive mode frequency");
  }
  const double f_lo = 0.7 * mode_freq_hz;
  const double f_hi = 1.3 * mode_freq_hz;
  constexpr int kCoarse = 241;
  constexpr int kFine = 81;

  struct Port {
    Eigen::Index row, col;
  };
  std::vector<Port> ports;
  ports.reserve(sg_ids.size());
  for (const std::string& id : sg_ids) {
    ports.push_back({closed.output_index({id, Signal::omega}),
                     closed.input_index({id, Signal::T_m})});
  }

  Evaluator ev(closed);
  const auto gain_at = [&](double f, const Port& p) {
    return std::abs(ev.at(cplx(0.0, 2.0 * kPi * f)).value(p.row, p.col));
  };

  Eigen::MatrixXd mags(static_cast<Eigen::Index>(sg_ids.size()), kCoarse);
  std::vector<double> freqs(kCoarse);
  for (int k = 0; k < kCoarse; ++k) {
    freqs[static_cast<size_t>(k)] = f_lo + (f_hi - f_lo) * k / (kCoarse - 1);
    const Eigen::MatrixXcd value =
        ev.at(cplx(0.0, 2.0 * kPi * freqs[static_cast<size_t>(k)])).value;
    for (size_t a = 0; a < ports.size(); ++a) {
      mags(static_cast<Eigen::Index>(a), k) = std::abs(value(ports[a].row, ports[a].col));
    }
  }

  ParticipationReport report;
  report.mode_freq_hz = mode_freq_hz;
  for (size_t a = 0; a < sg_ids.size(); ++a) {
    int best = 0;
    for (int k = 1; k < kCoarse; ++k) {
      if (mags(static_cast<Eigen::Index>(a), k) > mags(static_cast<Eigen::Index>(a), best)) {
        best = k;
      }
    }
    ParticipationEntry entry;
    entry.apparatus_id = sg_ids[a];
    entry.participating = best > 0 && best < kCoarse - 1;
    double peak_f = freqs[static_cast<size_t>(best)];
    double peak_g = mags(static_cast<Eigen::Index>(a), best);
    if (entry.participating) {
      // refine inside the bracketing cells
      const double lo = freqs[static_cast<size_t>(best - 1)];
      const double hi = freqs[static_cast<size_t>(best + 1)];
      for (int k = 0; k < kFine; ++k) {
        const double f = lo + (hi - lo) * k / (kFine - 1);
        const double g = gain_at(f, ports[a]);
        if (g > peak_g) {
          peak_g = g;
          peak_f = f;
        }
      }
    }
    entry.peak_freq_hz = peak_f;
    entry.peak_db = 20.0 * std::log10(peak_g);
    report.ranking.push_back(std::move(entry));
  }

  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [](const ParticipationEntry& x, const ParticipationEntry& y) {
                     if (x.participating != y.participating) return x.participating;
                     return x.peak_db > y.peak_db;
                   });
  return report;
}

std::vector<BodePoint> frequency_response_table(const StateSpaceModel& model,
                                                const PortLabel& input, const PortLabel& output,
                                                const std::vector<double>& freq_hz) {
  const Eigen::Index row = model.output_index(output);
  const Eigen::Index col = model.input_index(input);
  for (const double f : freq_hz) {
    if (f < 0.0) throw ConfigError("response frequencies must be non-negative");
  }
  Evaluator ev(model);
  std::vector<BodePoint> table;
  table.reserve(freq_hz.size());
  double prev_phase = 0.0;
  for (size_t k = 0; k < freq_hz.size(); ++k) {
    BodePoint pt;
    pt.freq_hz = freq_hz[k];
    pt.value = ev.at(cplx(0.0, 2.0 * kPi * freq_hz[k])).value(row, col);
    pt.magnitude_db = 20.0 * std::log10(std::abs(pt.value));
    double phase = std::atan2(pt.value.imag(), pt.value.real()) * 180.0 / kPi;
    if (k > 0) phase += 360.0 * std::round((prev_phase - phase) / 360.0);
    prev_phase = phase;
    pt.phase_deg = phase;
    table.push_back(pt);
  }
  return table;
}

int swing_mode_index(const Eigen::VectorXcd& poles) {
  int best = -1;
  for (Eigen::Index i = 0; i < poles.size(); ++i) {
    const double f = std::abs(poles(i).imag()) / (2.0 * kPi);
    if (f < 0.1 || f > 15.0) continue;
    if (best < 0 || poles(i).real() > poles(best).real()) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace gridport
