#include <algorithm>
#include <cmath>
#include <map>

#include "gridport/errors.hpp"
#include "gridport/port_mapping.hpp"

namespace gridport {

namespace {

Eigen::Index find_single(const std::vector<PortLabel>& labels, Signal sig) {
  Eigen::Index found = -1;
  for (size_t k = 0; k < labels.size(); ++k) {
    if (labels[k].signal == sig) {
      if (found >= 0) {
        throw ConfigError("more than one port carries signal " + to_string(sig));
      }
      found = static_cast<Eigen::Index>(k);
    }
  }
  if (found < 0) throw ConfigError("no port carries signal " + to_string(sig));
  return found;
}

}  // namespace

Eigen::Vector2d rotate(double epsilon, const Eigen::Vector2d& u_dq) {
  Eigen::Matrix2d rot;
  rot << std::cos(epsilon), -std::sin(epsilon), std::sin(epsilon), std::cos(epsilon);
  return rot * u_dq;
}

Eigen::Matrix<double, 2, 3> linearized_rotation(double epsilon0, const Eigen::Vector2d& u_dq0) {
  Eigen::Matrix2d rot;
  rot << std::cos(epsilon0), -std::sin(epsilon0), std::sin(epsilon0), std::cos(epsilon0);
  Eigen::Matrix<double, 2, 3> map;
  map.leftCols<2>() = rot;
  map.col(2) = rot * Eigen::Vector2d(-u_dq0(1), u_dq0(0));
  return map;
}

StateSpaceModel map_to_global(const StateSpaceModel& local, const OperatingPoint& op,
                              double omega_base) {
  const auto jd = find_single(local.input_labels, Signal::v_d);
  const auto jq = find_single(local.input_labels, Signal::v_q);
  const auto rd = find_single(local.output_labels, Signal::i_d);
  const auto rq = find_single(local.output_labels, Signal::i_q);
  const auto rw = find_single(local.output_labels, Signal::omega);

  const auto n = local.num_states();
  const auto m = local.num_inputs();
  const auto p = local.num_outputs();

  const double e0 = op.epsilon0;
  Eigen::Matrix2d rot;
  rot << std::cos(e0), -std::sin(e0), std::sin(e0), std::cos(e0);

  // static input mix: global terminal voltages rotate into the local frame
  Eigen::MatrixXd p_in = Eigen::MatrixXd::Identity(m, m);
  p_in(jd, jd) = rot(0, 0);
  p_in(jd, jq) = rot(1, 0);
  p_in(jq, jd) = rot(0, 1);
  p_in(jq, jq) = rot(1, 1);
  // angle-into-local-voltage column
  Eigen::VectorXd e_u = Eigen::VectorXd::Zero(m);
  e_u(jd) = op.input(1);
  e_u(jq) = -op.input(0);

  // static output mix: local currents rotate out to the global frame
  Eigen::MatrixXd p_out = Eigen::MatrixXd::Identity(p, p);
  p_out(rd, rd) = rot(0, 0);
  p_out(rd, rq) = rot(0, 1);
  p_out(rq, rd) = rot(1, 0);
  p_out(rq, rq) = rot(1, 1);
  // angle-into-global-current column
  const Eigen::Vector2d gi = rot * Eigen::Vector2d(-op.i_q0, op.i_d0);
  Eigen::VectorXd g_y = Eigen::VectorXd::Zero(p);
  g_y(rd) = gi(0);
  g_y(rq) = gi(1);

  const Eigen::RowVectorXd cw = local.C.row(rw);
  const Eigen::RowVectorXd dw = local.D.row(rw);

  Eigen::MatrixXd a(n + 1, n + 1);
  a.topLeftCorner(n, n) = local.A;
  a.topRightCorner(n, 1) = local.B * e_u;
  a.bottomLeftCorner(1, n) = omega_base * cw;
  a(n, n) = omega_base * dw.dot(e_u);

  Eigen::MatrixXd b(n + 1, m);
  b.topRows(n) = local.B * p_in;
  b.bottomRows(1) = omega_base * dw * p_in;

  Eigen::MatrixXd c(p, n + 1);
  c.leftCols(n) = p_out * local.C;
  c.rightCols(1) = p_out * local.D * e_u + g_y;

  Eigen::MatrixXd d = p_out * local.D * p_in;

  auto inputs = local.input_labels;
  inputs[jd].signal = Signal::v_D;
  inputs[jq].signal = Signal::v_Q;
  auto outputs = local.output_labels;
  outputs[rd].signal = Signal::i_D;
  outputs[rq].signal = Signal::i_Q;

  return StateSpaceModel(std::move(a), std::move(b), std::move(c), std::move(d),
                         std::move(inputs), std::move(outputs));
}

StateSpaceModel global_model(const Apparatus& apparatus, const SteadyState& ss) {
  Apparatus bound = apparatus;
  bound.params = ss.params;
  const double wb = std::visit([](const auto& p) { return p.omega_base; }, ss.params);
  return map_to_global(linearize(bound, ss.op), ss.op, wb);
}

StateSpaceModel close_grid(const StateSpaceModel& plant, const StateSpaceModel& grid) {
  return close_feedback(plant, grid, grid.output_labels, grid.input_labels,
                        FeedbackSign::positive);
}

namespace {

// Fans the grid's bus-level terminal ports out per apparatus: the fanned model
// has one (apparatus, i_D/i_Q) input and one (apparatus, v_D/v_Q) output per
// apparatus, wired to the grid port of that apparatus' bus.  Grid ports at
// buses hosting no apparatus see zero injection and are dropped.
StateSpaceModel fan_grid_ports(const std::vector<Apparatus>& apparatus,
                               const StateSpaceModel& grid) {
  const auto m = grid.num_inputs();
  const auto p = grid.num_outputs();
  const auto na = static_cast<Eigen::Index>(apparatus.size());

  Eigen::MatrixXd spread = Eigen::MatrixXd::Zero(m, 2 * na);
  Eigen::MatrixXd pick = Eigen::MatrixXd::Zero(2 * na, p);
  std::vector<PortLabel> in_labels, out_labels;
  for (Eigen::Index k = 0; k < na; ++k) {
    const auto& ap = apparatus[static_cast<size_t>(k)];
    spread(grid.input_index({ap.bus, Signal::i_D}), 2 * k) = 1.0;
    spread(grid.input_index({ap.bus, Signal::i_Q}), 2 * k + 1) = 1.0;
    pick(2 * k, grid.output_index({ap.bus, Signal::v_D})) = 1.0;
    pick(2 * k + 1, grid.output_index({ap.bus, Signal::v_Q})) = 1.0;
    in_labels.push_back({ap.id, Signal::i_D});
    in_labels.push_back({ap.id, Signal::i_Q});
    out_labels.push_back({ap.id, Signal::v_D});
    out_labels.push_back({ap.id, Signal::v_Q});
  }
  return StateSpaceModel(grid.A, grid.B * spread, pick * grid.C, pick * grid.D * spread,
                         std::move(in_labels), std::move(out_labels));
}

}  // namespace

StateSpaceModel assemble_system(const std::vector<Apparatus>& apparatus,
                                const std::vector<StateSpaceModel>& globals,
                                const StateSpaceModel& grid) {
  if (apparatus.empty() || apparatus.size() != globals.size()) {
    throw ConfigError("assemble_system needs one embedded model per apparatus");
  }
  StateSpaceModel stacked = globals.front();
  for (size_t k = 1; k < globals.size(); ++k) stacked = stack_models(stacked, globals[k]);
  const StateSpaceModel closed = close_grid(stacked, fan_grid_ports(apparatus, grid));

  std::map<std::string, std::string> bus_of;
  std::vector<std::string> bus_order;
  for (const auto& ap : apparatus) {
    bus_of[ap.id] = ap.bus;
    if (std::find(bus_order.begin(), bus_order.end(), ap.bus) == bus_order.end()) {
      bus_order.push_back(ap.bus);
    }
  }

  const auto m = closed.num_inputs();
  const auto p = closed.num_outputs();

  // column merge: per-bus voltage inputs first, untouched inputs after
  std::vector<PortLabel> new_inputs;
  Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(m, 0);
  auto add_col = [&](const PortLabel& label, const std::vector<Eigen::Index>& sources) {
    mix.conservativeResize(Eigen::NoChange, mix.cols() + 1);
    mix.col(mix.cols() - 1).setZero();
    for (auto j : sources) mix(j, mix.cols() - 1) = 1.0;
    new_inputs.push_back(label);
  };
  for (const auto& bus : bus_order) {
    for (Signal sig : {Signal::v_D, Signal::v_Q}) {
      std::vector<Eigen::Index> cols;
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto& lab = closed.input_labels[static_cast<size_t>(j)];
        if (lab.signal == sig && bus_of.count(lab.apparatus_id) &&
            bus_of.at(lab.apparatus_id) == bus) {
          cols.push_back(j);
        }
      }
      add_col({bus, sig}, cols);
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& lab = closed.input_labels[static_cast<size_t>(j)];
    if (lab.signal == Signal::v_D || lab.signal == Signal::v_Q) continue;
    add_col(lab, {j});
  }

  // row merge: per-bus current outputs first, untouched outputs after
  std::vector<PortLabel> new_outputs;
  Eigen::MatrixXd pick = Eigen::MatrixXd::Zero(0, p);
  auto add_row = [&](const PortLabel& label, const std::vector<Eigen::Index>& sources) {
    pick.conservativeResize(pick.rows() + 1, Eigen::NoChange);
    pick.row(pick.rows() - 1).setZero();
    for (auto r : sources) pick(pick.rows() - 1, r) = 1.0;
    new_outputs.push_back(label);
  };
  for (const auto& bus : bus_order) {
    for (Signal sig : {Signal::i_D, Signal::i_Q}) {
      std::vector<Eigen::Index> rows;
      for (Eigen::Index r = 0; r < p; ++r) {
        const auto& lab = closed.output_labels[static_cast<size_t>(r)];
        if (lab.signal == sig && bus_of.count(lab.apparatus_id) &&
            bus_of.at(lab.apparatus_id) == bus) {
          rows.push_back(r);
        }
      }
      add_row({bus, sig}, rows);
    }
  }
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto& lab = closed.output_labels[static_cast<size_t>(r)];
    if (lab.signal == Signal::i_D || lab.signal == Signal::i_Q) continue;
    add_row(lab, {r});
  }

  return StateSpaceModel(closed.A, closed.B * mix, pick * closed.C, pick * closed.D * mix,
                         std::move(new_inputs), std::move(new_outputs));
}

}  // namespace gridport
