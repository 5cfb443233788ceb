#include "gridport/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "gridport/port_mapping.hpp"

namespace gridport {

namespace {

void check_options(const SimOptions& opt, Eigen::Index n_columns, const char* column_kind) {
  if (!(opt.dt > 0.0)) {
    throw ConfigError("integration step size must be positive");
  }
  if (opt.record_every < 1) {
    throw ConfigError("record_every must be at least 1");
  }
  if (!(opt.divergence_limit > 0.0)) {
    throw ConfigError("divergence limit must be positive");
  }
  for (const int p : opt.probes) {
    if (p < 0 || p >= n_columns) {
      std::ostringstream msg;
      msg << "probe index " << p << " is out of range; the model has " << n_columns << " "
          << column_kind;
      throw ConfigError(msg.str());
    }
  }
}

void check_events(std::vector<InputStepEvent>& events, Eigen::Index n_inputs) {
  for (const auto& e : events) {
    if (e.input < 0 || e.input >= n_inputs) {
      std::ostringstream msg;
      msg << "event input index " << e.input << " is out of range; the model has " << n_inputs
          << " inputs";
      throw ConfigError(msg.str());
    }
    if (e.time < 0.0) {
      throw ConfigError("event times must not be negative");
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const InputStepEvent& a, const InputStepEvent& b) { return a.time < b.time; });
}

std::vector<int> probe_list(const SimOptions& opt, Eigen::Index n_columns) {
  if (!opt.probes.empty()) return opt.probes;
  std::vector<int> all(static_cast<size_t>(n_columns));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

// accumulates decimated samples, then lays them out as a row-per-instant matrix
struct Recorder {
  std::vector<int> probes;
  std::vector<double> time;
  std::vector<double> flat;

  void add(double t, const Eigen::VectorXd& values) {
    time.push_back(t);
    for (const int p : probes) flat.push_back(values(p));
  }

  [[nodiscard]] SimTrace finish(std::vector<std::string> columns, bool diverged,
                                double diverged_at) const {
    SimTrace trace;
    trace.time = time;
    trace.columns = std::move(columns);
    trace.samples = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>(
        flat.data(), static_cast<Eigen::Index>(time.size()),
        static_cast<Eigen::Index>(probes.size()));
    trace.diverged = diverged;
    trace.diverged_at = diverged_at;
    return trace;
  }
};

[[nodiscard]] long long step_count(double t_end, double dt) {
  return std::llround(std::ceil(t_end / dt - 1e-9));
}

}  // namespace

SimTrace simulate_nonlinear(const std::vector<SimSegment>& segments,
                            const Eigen::VectorXd& x_init, const Eigen::VectorXd& u_init,
                            std::vector<InputStepEvent> events, const SimOptions& options) {
  if (segments.empty()) {
    throw ConfigError("the run needs at least one segment");
  }
  for (const auto& seg : segments) {
    if (seg.system == nullptr) {
      throw ConfigError("every segment needs a model");
    }
  }
  const WholeSystem& first = *segments.front().system;
  double prev_end = 0.0;
  for (const auto& seg : segments) {
    if (seg.system->n_states != first.n_states || seg.system->n_inputs != first.n_inputs) {
      throw ConfigError("segments disagree on the state or input layout");
    }
    if (!(seg.t_end > prev_end)) {
      throw ConfigError("segment end times must increase");
    }
    prev_end = seg.t_end;
  }
  if (x_init.size() != first.n_states || u_init.size() != first.n_inputs) {
    throw ConfigError("initial state or input size does not match the model");
  }
  check_options(options, first.n_states, "states");
  check_events(events, first.n_inputs);

  const std::vector<int> probes = probe_list(options, first.n_states);
  std::vector<std::string> columns;
  columns.reserve(probes.size());
  for (const int p : probes) columns.push_back(first.state_names[static_cast<size_t>(p)]);

  const double dt = options.dt;
  const long long n_steps = step_count(segments.back().t_end, dt);
  Eigen::VectorXd x = x_init;
  Eigen::VectorXd u = u_init;
  size_t next_event = 0;
  size_t seg = 0;
  bool diverged = false;
  double diverged_at = 0.0;

  Recorder rec{probes, {}, {}};
  rec.add(0.0, x);
  for (long long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    while (next_event < events.size() && events[next_event].time <= t + dt / 2) {
      u(events[next_event].input) = events[next_event].value;
      ++next_event;
    }
    while (seg + 1 < segments.size() && segments[seg].t_end <= t + dt / 2) ++seg;
    const WholeSystem& ws = *segments[seg].system;

    bool bad = false;
    Eigen::VectorXd xn;
    try {
      const Eigen::VectorXd k1 = whole_rhs(ws, x, u);
      const Eigen::VectorXd k2 = whole_rhs(ws, x + (dt / 2) * k1, u);
      const Eigen::VectorXd k3 = whole_rhs(ws, x + (dt / 2) * k2, u);
      const Eigen::VectorXd k4 = whole_rhs(ws, x + dt * k3, u);
      xn = x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    } catch (const NumericalError&) {
      bad = true;  // the state left the model domain mid-step
    }
    if (!bad && (!xn.allFinite() || xn.cwiseAbs().maxCoeff() > options.divergence_limit)) {
      bad = true;
    }
    if (bad) {
      diverged = true;
      diverged_at = t + dt;
      break;
    }
    x = xn;
    if ((k + 1) % options.record_every == 0 || k + 1 == n_steps) {
      rec.add(static_cast<double>(k + 1) * dt, x);
    }
  }
  return rec.finish(std::move(columns), diverged, diverged_at);
}

SimTrace simulate_linear(const StateSpaceModel& model, const Eigen::VectorXd& x_init,
                         const Eigen::VectorXd& u_init, double t_end,
                         std::vector<InputStepEvent> events, const SimOptions& options) {
  const Eigen::Index n = model.num_states();
  const Eigen::Index m = model.num_inputs();
  if (!(t_end > 0.0)) {
    throw ConfigError("the end time must be positive");
  }
  if (x_init.size() != n || u_init.size() != m) {
    throw ConfigError("initial state or input size does not match the model");
  }
  check_options(options, model.num_outputs(), "outputs");
  check_events(events, m);

  const std::vector<int> probes = probe_list(options, model.num_outputs());
  std::vector<std::string> columns;
  columns.reserve(probes.size());
  for (const int p : probes) columns.push_back(to_string(model.output_labels[static_cast<size_t>(p)]));

  // zero-order hold: both maps come out of one exponential of the augmented matrix
  const double dt = options.dt;
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = model.A;
  aug.topRightCorner(n, m) = model.B;
  const Eigen::MatrixXd e = (aug * dt).exp();
  const Eigen::MatrixXd ad = e.topLeftCorner(n, n);
  const Eigen::MatrixXd bd = e.topRightCorner(n, m);

  const long long n_steps = step_count(t_end, dt);
  Eigen::VectorXd x = x_init;
  Eigen::VectorXd u = u_init;
  size_t next_event = 0;
  bool diverged = false;
  double diverged_at = 0.0;

  Recorder rec{probes, {}, {}};
  for (long long k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    while (next_event < events.size() && events[next_event].time <= t + dt / 2) {
      u(events[next_event].input) = events[next_event].value;
      ++next_event;
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.divergence_limit) {
      diverged = true;
      diverged_at = t;
      break;
    }
    if (k % options.record_every == 0 || k == n_steps) {
      rec.add(t, model.C * x + model.D * u);
    }
    if (k < n_steps) x = ad * x + bd * u;
  }
  return rec.finish(std::move(columns), diverged, diverged_at);
}

// ===== sinusoidal injection scan =====

Eigen::Matrix2cd measure_admittance(const DrivenOde& ode, double freq_hz,
                                    const ScanOptions& options) {
  if (!ode.rhs || !ode.current) {
    throw ConfigError("the driven circuit needs rhs and current callbacks");
  }
  if (!(freq_hz > 0.0)) {
    throw ConfigError("the scan frequency must be positive");
  }
  if (!(options.amplitude > 0.0) || !(options.dt > 0.0) || options.settle_cycles < 1 ||
      options.window_cycles < 1 || options.max_settle_rounds < 0) {
    throw ConfigError("scan options out of range");
  }
  if (ode.a.size() > 0) {
    const double max_re = matrix_eigenvalues(ode.a).real().maxCoeff();
    if (max_re > 1e-9) {
      std::ostringstream msg;
      msg << "the plant is unstable (largest pole real part " << max_re
          << " 1/s); the injection scan cannot reach a periodic steady state";
      throw IndexInapplicableError(msg.str());
    }
  }

  const double period = 1.0 / freq_hz;
  const long long per_cycle = std::max<long long>(32, step_count(period, options.dt));
  const double h = period / static_cast<double>(per_cycle);
  const double w = 2.0 * kPi * freq_hz;
  const std::complex<double> drive_phasor(0.0, -options.amplitude);  // amp * sin

  Eigen::Matrix2cd result;
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::Vector2d axis_dir = Eigen::Vector2d::Unit(axis);
    const auto v_at = [&](double t) -> Eigen::Vector2d {
      return ode.v0 + options.amplitude * std::sin(w * t) * axis_dir;
    };

    Eigen::VectorXd x = ode.x0;
    if (ode.a.size() > 0 && ode.b.size() > 0) {
      // seed on the linear periodic orbit so settling only has to absorb
      // the nonlinear correction
      const Eigen::MatrixXcd shifted =
          std::complex<double>(0.0, w) * Eigen::MatrixXcd::Identity(x.size(), x.size()) -
          ode.a.cast<std::complex<double>>();
      const Eigen::VectorXcd orbit =
          shifted.partialPivLu().solve(ode.b.col(axis).cast<std::complex<double>>() *
                                       drive_phasor);
      x += orbit.real();
    }

    long long step_idx = 0;
    const auto advance = [&](long long steps) {
      for (long long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(step_idx) * h;
        const Eigen::VectorXd k1 = ode.rhs(x, v_at(t));
        const Eigen::VectorXd k2 = ode.rhs(x + (h / 2) * k1, v_at(t + h / 2));
        const Eigen::VectorXd k3 = ode.rhs(x + (h / 2) * k2, v_at(t + h / 2));
        const Eigen::VectorXd k4 = ode.rhs(x + h * k3, v_at(t + h));
        x += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
        ++step_idx;
        if (!x.allFinite()) {
          std::ostringstream msg;
          msg << "the injection scan diverged at " << freq_hz << " Hz";
          throw NumericalError(msg.str());
        }
      }
    };

    // single-bin projection over an integer number of cycles
    const auto window = [&]() -> Eigen::Vector2cd {
      Eigen::Vector2cd acc = Eigen::Vector2cd::Zero();
      const long long steps = per_cycle * options.window_cycles;
      for (long long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(step_idx) * h;
        const Eigen::Vector2d current = ode.current(x, v_at(t));
        acc += current * std::exp(std::complex<double>(0.0, -w * t));
        advance(1);
      }
      return acc * (2.0 / static_cast<double>(steps));
    };

    advance(per_cycle * options.settle_cycles);
    Eigen::Vector2cd first = window();
    Eigen::Vector2cd second = window();
    int rounds = 0;
    while ((first - second).norm() >
               options.consistency_tol *
                   std::max(second.norm(), 1e-6 * options.amplitude) &&
           rounds < options.max_settle_rounds) {
      advance(per_cycle * options.settle_cycles);
      first = window();
      second = window();
      ++rounds;
    }
    if ((first - second).norm() >
        options.consistency_tol * std::max(second.norm(), 1e-6 * options.amplitude)) {
      std::ostringstream msg;
      msg << "the injection scan did not reach a periodic steady state at " << freq_hz
          << " Hz; consecutive windows disagree by " << (first - second).norm();
      throw NumericalError(msg.str());
    }
    result.col(axis) = second / drive_phasor;
  }
  return result;
}

Eigen::Matrix2cd measure_apparatus_admittance(const Apparatus& apparatus, const SteadyState& ss,
                                              double freq_hz, const ScanOptions& options) {
  const int n = state_count(ss.params);
  const double omega_base =
      std::visit([](const auto& p) { return p.omega_base; }, ss.params);
  const double mech0 = ss.op.input(2);

  const auto local_input = [n, mech0](const Eigen::VectorXd& z,
                                      const Eigen::Vector2d& v_global) -> Eigen::Vector3d {
    Eigen::Vector3d u;
    u.head<2>() = rotate(-z(n), v_global);
    u(2) = mech0;
    return u;
  };

  DrivenOde ode;
  ode.x0.resize(n + 1);
  ode.x0.head(n) = ss.op.state;
  ode.x0(n) = ss.op.epsilon0;
  ode.v0 = rotate(ss.op.epsilon0, ss.op.input.head<2>());
  ode.rhs = [params = ss.params, local_input, omega_base, n](
                const Eigen::VectorXd& z, const Eigen::Vector2d& v_global) -> Eigen::VectorXd {
    const Eigen::Vector3d u = local_input(z, v_global);
    Eigen::VectorXd dz(n + 1);
    dz.head(n) = dynamics(params, z.head(n), u);
    dz(n) = omega_base * (terminal(params, z.head(n), u)(2) - 1.0);
    return dz;
  };
  ode.current = [params = ss.params, local_input, n](
                    const Eigen::VectorXd& z, const Eigen::Vector2d& v_global) -> Eigen::Vector2d {
    const Eigen::Vector3d u = local_input(z, v_global);
    const Eigen::Vector2d i_local = terminal(params, z.head(n), u).head<2>();
    return rotate(z(n), i_local);
  };

  const StateSpaceModel gm = global_model(apparatus, ss);
  ode.a = gm.A;
  ode.b.resize(n + 1, 2);
  ode.b.col(0) = gm.B.col(gm.input_index({apparatus.id, Signal::v_D}));
  ode.b.col(1) = gm.B.col(gm.input_index({apparatus.id, Signal::v_Q}));
  return measure_admittance(ode, freq_hz, options);
}

}  // namespace gridport
