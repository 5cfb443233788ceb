#include <doctest.h>

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "gridport/port_mapping.hpp"
#include "support/oracles.hpp"

using namespace gridport;
using cd = std::complex<double>;

namespace {

Apparatus make_sg() {
  SGParams p;
  p.J = 7.0;
  p.K_D = 1.2;
  p.R = 0.01;
  p.L = 0.15;
  return {"sg1", "bus1", p};
}

Apparatus make_ibr() {
  IBRParams p;
  apply_bandwidth_gains(p);
  return {"ibr1", "bus1", p};
}

double omega_base_of(const ApparatusParams& params) {
  return std::visit([](const auto& p) { return p.omega_base; }, params);
}

// Transfer-function reference for the frame embedding: the appended angle state
// closes a scalar loop through the speed output, and every block of the global
// model follows from the local blocks by rational algebra in s.
void check_embedding_pointwise(const StateSpaceModel& local, const StateSpaceModel& global,
                               const OperatingPoint& op, double wb, int n_extra) {
  const double e0 = op.epsilon0;
  Eigen::Matrix2cd T;
  T << std::cos(e0), -std::sin(e0), std::sin(e0), std::cos(e0);
  Eigen::Vector2cd V0(-op.input(1), op.input(0));
  Eigen::Vector2cd I0(-op.i_q0, op.i_d0);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> logw(-1.0, 4.0);
  for (int k = 0; k < 20; ++k) {
    const cd s(0.0, std::pow(10.0, logw(rng)));
    const Eigen::MatrixXcd L = evaluate(local, s).value;
    const Eigen::MatrixXcd G = evaluate(global, s).value;

    const Eigen::Matrix2cd Gvi = L.block(0, 0, 2, 2);
    const Eigen::Vector2cd Gmi = L.block(0, 2, 2, 1);
    const Eigen::RowVector2cd Gvw = L.block(2, 0, 1, 2);
    const cd Gmw = L(2, 2);
    const cd den = s + wb * (Gvw * V0)(0);

    const Eigen::Matrix2cd Pvi = T * (Gvi + (I0 - Gvi * V0) * (wb / den) * Gvw) * T.transpose();
    const Eigen::Vector2cd Pmi = T * (Gmi + (I0 - Gvi * V0) * (wb / den) * Gmw);
    const Eigen::RowVector2cd Pvw =
        (Gvw - (Gvw * V0)(0) * (wb / den) * Gvw) * T.transpose();
    const cd Pmw = s / den * Gmw;

    CHECK((G.block(0, 0, 2, 2) - Pvi).norm() <= 1e-9 * (1.0 + Pvi.norm()));
    CHECK((G.block(0, 2, 2, 1) - Pmi).norm() <= 1e-9 * (1.0 + Pmi.norm()));
    CHECK((G.block(2, 0, 1, 2) - Pvw).norm() <= 1e-9 * (1.0 + Pvw.norm()));
    CHECK(std::abs(G(2, 2) - Pmw) <= 1e-9 * (1.0 + std::abs(Pmw)));

    for (int r = 0; r < n_extra; ++r) {
      const Eigen::RowVector2cd Gvy = L.block(3 + r, 0, 1, 2);
      const cd Gmy = L(3 + r, 2);
      const Eigen::RowVector2cd Pvy =
          (Gvy - (Gvy * V0)(0) * (wb / den) * Gvw) * T.transpose();
      const cd Pmy = Gmy - (Gvy * V0)(0) * (wb / den) * Gmw;
      CHECK((G.block(3 + r, 0, 1, 2) - Pvy).norm() <= 1e-9 * (1.0 + Pvy.norm()));
      CHECK(std::abs(G(3 + r, 2) - Pmy) <= 1e-9 * (1.0 + std::abs(Pmy)));
    }
  }
}

// Single bus capacitor plus an R/L branch to a fixed source; inputs are the
// injected currents at the bus, outputs the bus voltage deviations.
StateSpaceModel rlc_grid(const std::vector<std::string>& port_ids, double c_b, double r_b,
                         double l_b, double wb) {
  Eigen::Matrix2d W;
  W << 0.0, -1.0, 1.0, 0.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a.block(0, 0, 2, 2) = -wb * W;
  a.block(0, 2, 2, 2) = -(wb / c_b) * Eigen::Matrix2d::Identity();
  a.block(2, 0, 2, 2) = (wb / l_b) * Eigen::Matrix2d::Identity();
  a.block(2, 2, 2, 2) = -(wb * r_b / l_b) * Eigen::Matrix2d::Identity() - wb * W;
  const auto n_ports = static_cast<Eigen::Index>(port_ids.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 2 * n_ports);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n_ports, 4);
  std::vector<PortLabel> ins, outs;
  for (Eigen::Index k = 0; k < n_ports; ++k) {
    b(0, 2 * k) = wb / c_b;
    b(1, 2 * k + 1) = wb / c_b;
    c(2 * k, 0) = 1.0;
    c(2 * k + 1, 1) = 1.0;
    ins.push_back({port_ids[k], Signal::i_D});
    ins.push_back({port_ids[k], Signal::i_Q});
    outs.push_back({port_ids[k], Signal::v_D});
    outs.push_back({port_ids[k], Signal::v_Q});
  }
  return StateSpaceModel(a, b, c, Eigen::MatrixXd::Zero(2 * n_ports, 2 * n_ports), ins, outs);
}

}  // namespace

TEST_CASE("rotation by the frame angle") {
  CHECK((rotate(0.0, {0.3, -0.7}) - Eigen::Vector2d(0.3, -0.7)).norm() == 0.0);
  const Eigen::Vector2d quarter = rotate(kPi / 2, {1.0, 0.0});
  CHECK(quarter(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(quarter(1) == doctest::Approx(1.0).epsilon(1e-12));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int k = 0; k < 8; ++k) {
    const Eigen::Vector2d u(uni(rng), uni(rng));
    CHECK(rotate(uni(rng), u).norm() == doctest::Approx(u.norm()).epsilon(1e-12));
  }
}

TEST_CASE("linearized rotation matches finite differences of the full rotation") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int k = 0; k < 10; ++k) {
    const double e0 = uni(rng);
    const Eigen::Vector2d u0(uni(rng), uni(rng));
    const auto map = linearized_rotation(e0, u0);
    auto full = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
      return rotate(e0 + z(2), u0 + z.head<2>());
    };
    const Eigen::MatrixXd fd = oracles::fd_jacobian(full, Eigen::Vector3d::Zero(), 1e-6);
    CHECK((map - fd).lpNorm<Eigen::Infinity>() < 1e-6);
  }
  // at zero angle the angle column reduces to the quarter-turned base point
  const auto map0 = linearized_rotation(0.0, {0.8, 0.25});
  CHECK(map0(0, 2) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(map0(1, 2) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("machine embedding matches the frame-loop transfer algebra pointwise") {
  auto sg = make_sg();
  auto ss = solve_steady_state(sg, {0.6, 0.15, 1.02, 0.3});
  sg.params = ss.params;
  auto local = linearize(sg, ss.op);
  const double wb = omega_base_of(sg.params);
  auto global = map_to_global(local, ss.op, wb);
  CHECK(global.num_states() == 4);
  check_embedding_pointwise(local, global, ss.op, wb, 0);
}

TEST_CASE("inverter embedding matches the frame-loop transfer algebra pointwise") {
  auto ibr = make_ibr();
  auto ss = solve_steady_state(ibr, {0.9, -0.1, 0.98, -0.4});
  ibr.params = ss.params;
  auto local = linearize(ibr, ss.op);
  const double wb = omega_base_of(ibr.params);
  auto global = map_to_global(local, ss.op, wb);
  CHECK(global.num_states() == 8);
  check_embedding_pointwise(local, global, ss.op, wb, 1);
}

TEST_CASE("embedding relabels the terminal pair to the global frame") {
  auto sg = make_sg();
  auto ss = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.0});
  sg.params = ss.params;
  auto global = global_model(sg, ss);
  CHECK(global.input_labels[0] == PortLabel{"sg1", Signal::v_D});
  CHECK(global.input_labels[1] == PortLabel{"sg1", Signal::v_Q});
  CHECK(global.input_labels[2] == PortLabel{"sg1", Signal::T_m});
  CHECK(global.output_labels[0] == PortLabel{"sg1", Signal::i_D});
  CHECK(global.output_labels[2] == PortLabel{"sg1", Signal::omega});
}

TEST_CASE("embedded state matrix does not depend on the terminal angle") {
  auto sg = make_sg();
  auto s1 = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.0});
  auto s2 = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.7});
  sg.params = s1.params;
  auto g1 = global_model(sg, s1);
  auto g2 = global_model(sg, s2);
  CHECK((g1.A - g2.A).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("machine embedding at no load has the hand-computed angle couplings") {
  auto sg = make_sg();
  const auto& p0 = std::get<SGParams>(sg.params);
  const double wb = p0.omega_base;
  auto ss = solve_steady_state(sg, {0.0, 0.0, 1.0, 0.0});
  sg.params = ss.params;
  auto g = global_model(sg, ss);
  // at no load v_dq0 = (1, 0): the angle feeds -v_d0 into the q-axis voltage
  CHECK(g.A(1, 3) == doctest::Approx(-wb).epsilon(1e-12));
  CHECK(g.A(0, 3) == doctest::Approx(0.0).epsilon(1e-12));
  // the angle integrates the speed state
  CHECK(g.A(3, 2) == doctest::Approx(wb).epsilon(1e-12));
  CHECK(g.A(3, 3) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("grid closure matches the feedback algebra pointwise") {
  auto sg = make_sg();
  auto ss = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.0});
  sg.params = ss.params;
  const double wb = omega_base_of(sg.params);
  auto gp = global_model(sg, ss);
  auto grid = rlc_grid({"sg1"}, 0.05, 0.02, 0.4, wb);
  auto gpp = close_grid(gp, grid);
  CHECK(gpp.num_states() == gp.num_states() + 4);
  CHECK(gpp.input_labels == gp.input_labels);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> logw(-1.0, 3.5);
  for (int k = 0; k < 10; ++k) {
    const cd s(0.0, std::pow(10.0, logw(rng)));
    const Eigen::MatrixXcd P = evaluate(gp, s).value;
    const Eigen::MatrixXcd Z = evaluate(grid, s).value;
    const Eigen::MatrixXcd G = evaluate(gpp, s).value;

    const Eigen::Matrix2cd Pvi = P.block(0, 0, 2, 2);
    const Eigen::Vector2cd Pmi = P.block(0, 2, 2, 1);
    const Eigen::RowVector2cd Pvw = P.block(2, 0, 1, 2);
    const cd Pmw = P(2, 2);

    const Eigen::Matrix2cd gain =
        (Eigen::Matrix2cd::Identity() - Pvi * Z).inverse();
    const Eigen::Matrix2cd Cvi = gain * Pvi;
    const Eigen::Vector2cd Cmi = gain * Pmi;
    const Eigen::RowVector2cd Cvw = Pvw + Pvw * Z * Cvi;
    const cd Cmw = Pmw + (Pvw * Z * Cmi)(0);

    CHECK((G.block(0, 0, 2, 2) - Cvi).norm() / Cvi.norm() < 1e-9);
    CHECK((G.block(0, 2, 2, 1) - Cmi).norm() / Cmi.norm() < 1e-9);
    CHECK((G.block(2, 0, 1, 2) - Cvw).norm() / Cvw.norm() < 1e-9);
    CHECK(std::abs(G(2, 2) - Cmw) / std::abs(Cmw) < 1e-9);
  }
}

TEST_CASE("frame loop vanishes when rotor inertia is huge") {
  auto sg = make_sg();
  std::get<SGParams>(sg.params).J = 1e9;
  auto ss = solve_steady_state(sg, {0.6, 0.15, 1.02, 0.3});
  sg.params = ss.params;
  auto local = linearize(sg, ss.op);
  auto global = map_to_global(local, ss.op, omega_base_of(sg.params));

  const double e0 = ss.op.epsilon0;
  Eigen::Matrix2cd T;
  T << std::cos(e0), -std::sin(e0), std::sin(e0), std::cos(e0);
  for (const cd s : {cd(0.0, 2.0), cd(0.0, 40.0), cd(0.0, 377.0)}) {
    const Eigen::Matrix2cd Gvi = evaluate(local, s).value.block(0, 0, 2, 2);
    const Eigen::Matrix2cd Pvi = evaluate(global, s).value.block(0, 0, 2, 2);
    const Eigen::Matrix2cd fixed = T * Gvi * T.transpose();
    CHECK((Pvi - fixed).norm() / fixed.norm() < 1e-4);
  }
}

TEST_CASE("embedding at a fictitious zero operating point only appends a dead state") {
  Eigen::Matrix3d a;
  a << -2.0, 0.4, 0.0, -0.3, -1.0, 0.7, 0.0, 0.5, -4.0;
  Eigen::Matrix3d b;
  b << 1.0, 0.2, 0.0, 0.0, 0.9, 0.1, 0.3, 0.0, 1.0;
  Eigen::Matrix3d c;
  c << 0.8, 0.0, 0.2, 0.1, 1.0, 0.0, 0.0, 0.3, 0.6;
  StateSpaceModel local(
      a, b, c, Eigen::Matrix3d::Zero(),
      {{"x", Signal::v_d}, {"x", Signal::v_q}, {"x", Signal::T_m}},
      {{"x", Signal::i_d}, {"x", Signal::i_q}, {"x", Signal::omega}});
  OperatingPoint op;
  op.state = Eigen::Vector3d::Zero();
  op.input = Eigen::Vector3d::Zero();
  auto global = map_to_global(local, op, 377.0);
  CHECK(global.num_states() == 4);
  for (const cd s : {cd(0.0, 1.0), cd(0.0, 25.0), cd(-0.5, 90.0)}) {
    const Eigen::MatrixXcd G = evaluate(global, s).value;
    const Eigen::MatrixXcd L = evaluate(local, s).value;
    CHECK((G - L).norm() <= 1e-12 * (1.0 + L.norm()));
  }
}

TEST_CASE("closing a zero-impedance grid changes nothing") {
  auto sg = make_sg();
  auto ss = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.0});
  sg.params = ss.params;
  auto gp = global_model(sg, ss);
  StateSpaceModel zero_grid(
      Eigen::MatrixXd::Zero(0, 0), Eigen::MatrixXd::Zero(0, 2), Eigen::MatrixXd::Zero(2, 0),
      Eigen::MatrixXd::Zero(2, 2), {{"sg1", Signal::i_D}, {"sg1", Signal::i_Q}},
      {{"sg1", Signal::v_D}, {"sg1", Signal::v_Q}});
  auto gpp = close_grid(gp, zero_grid);
  CHECK(gpp.num_states() == gp.num_states());
  CHECK((gpp.A - gp.A).norm() == 0.0);
  CHECK((gpp.B - gp.B).norm() == 0.0);
  CHECK((gpp.C - gp.C).norm() == 0.0);
  CHECK((gpp.D - gp.D).norm() == 0.0);
}

TEST_CASE("static unit plant against a half-unit grid doubles") {
  StateSpaceModel plant(
      Eigen::MatrixXd::Zero(0, 0), Eigen::MatrixXd::Zero(0, 2), Eigen::MatrixXd::Zero(2, 0),
      Eigen::MatrixXd::Identity(2, 2), {{"x", Signal::v_D}, {"x", Signal::v_Q}},
      {{"x", Signal::i_D}, {"x", Signal::i_Q}});
  StateSpaceModel grid(
      Eigen::MatrixXd::Zero(0, 0), Eigen::MatrixXd::Zero(0, 2), Eigen::MatrixXd::Zero(2, 0),
      0.5 * Eigen::MatrixXd::Identity(2, 2), {{"x", Signal::i_D}, {"x", Signal::i_Q}},
      {{"x", Signal::v_D}, {"x", Signal::v_Q}});
  auto closed = close_grid(plant, grid);
  CHECK((closed.D - 2.0 * Eigen::Matrix2d::Identity()).norm() < 1e-14);
}

TEST_CASE("closure requires matching port labels") {
  auto sg = make_sg();
  auto ss = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.0});
  sg.params = ss.params;
  const double wb = omega_base_of(sg.params);
  auto gp = global_model(sg, ss);
  auto grid = rlc_grid({"other"}, 0.05, 0.02, 0.4, wb);
  CHECK_THROWS_AS((void)close_grid(gp, grid), ConfigError);
}

TEST_CASE("assembled system aggregates shared-bus terminals") {
  auto sg_a = make_sg();
  sg_a.id = "sgA";
  auto sg_b = make_sg();
  sg_b.id = "sgB";
  std::get<SGParams>(sg_b.params).J = 3.0;
  const double wb = omega_base_of(sg_a.params);

  auto ss_a = solve_steady_state(sg_a, {0.4, 0.05, 1.0, 0.1});
  auto ss_b = solve_steady_state(sg_b, {0.3, 0.02, 1.0, 0.1});
  sg_a.params = ss_a.params;
  sg_b.params = ss_b.params;
  auto ga = global_model(sg_a, ss_a);
  auto gb = global_model(sg_b, ss_b);

  auto grid2 = rlc_grid({"bus1"}, 0.05, 0.02, 0.4, wb);
  auto sys = assemble_system({sg_a, sg_b}, {ga, gb}, grid2);

  REQUIRE(sys.input_labels.size() == 4);
  CHECK(sys.input_labels[0] == PortLabel{"bus1", Signal::v_D});
  CHECK(sys.input_labels[1] == PortLabel{"bus1", Signal::v_Q});
  CHECK(sys.input_labels[2] == PortLabel{"sgA", Signal::T_m});
  CHECK(sys.input_labels[3] == PortLabel{"sgB", Signal::T_m});
  REQUIRE(sys.output_labels.size() == 4);
  CHECK(sys.output_labels[0] == PortLabel{"bus1", Signal::i_D});
  CHECK(sys.output_labels[1] == PortLabel{"bus1", Signal::i_Q});
  CHECK(sys.output_labels[2] == PortLabel{"sgA", Signal::omega});
  CHECK(sys.output_labels[3] == PortLabel{"sgB", Signal::omega});

  // oracle: the same physical grid with the bus port written out once per
  // machine, closed with the public primitives, then aggregated by hand
  auto grid_fan = rlc_grid({"sgA", "sgB"}, 0.05, 0.02, 0.4, wb);
  auto stacked = stack_models(ga, gb);
  auto closed = close_feedback(stacked, grid_fan, grid_fan.output_labels,
                               grid_fan.input_labels, FeedbackSign::positive);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> logw(-1.0, 3.0);
  for (int k = 0; k < 6; ++k) {
    const cd s(0.0, std::pow(10.0, logw(rng)));
    const Eigen::MatrixXcd raw = evaluate(closed, s).value;
    const Eigen::MatrixXcd agg = evaluate(sys, s).value;
    // rows/cols of `raw`: inputs [A.vD A.vQ A.Tm | B.vD B.vQ B.Tm],
    // outputs [A.iD A.iQ A.w | B.iD B.iQ B.w]
    Eigen::MatrixXcd expect(4, 4);
    Eigen::MatrixXcd rowsum(4, 6);
    rowsum.row(0) = raw.row(0) + raw.row(3);
    rowsum.row(1) = raw.row(1) + raw.row(4);
    rowsum.row(2) = raw.row(2);
    rowsum.row(3) = raw.row(5);
    expect.col(0) = rowsum.col(0) + rowsum.col(3);
    expect.col(1) = rowsum.col(1) + rowsum.col(4);
    expect.col(2) = rowsum.col(2);
    expect.col(3) = rowsum.col(5);
    CHECK((agg - expect).norm() / expect.norm() < 1e-10);
  }
}

TEST_CASE("assembled system keeps per-bus ports apart across buses") {
  auto sg = make_sg();
  auto ibr = make_ibr();
  ibr.bus = "bus2";
  const double wb = omega_base_of(sg.params);

  auto ss_sg = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.0});
  auto ss_ibr = solve_steady_state(ibr, {0.4, 0.0, 1.0, 0.0});
  sg.params = ss_sg.params;
  ibr.params = ss_ibr.params;
  auto g1 = global_model(sg, ss_sg);
  auto g2 = global_model(ibr, ss_ibr);

  // two independent single-bus grids stacked act as a two-port network
  auto grid = stack_models(rlc_grid({"bus1"}, 0.05, 0.02, 0.4, wb),
                           rlc_grid({"bus2"}, 0.05, 0.01, 0.2, wb));
  auto sys = assemble_system({sg, ibr}, {g1, g2}, grid);

  REQUIRE(sys.input_labels.size() == 6);
  CHECK(sys.input_labels[0] == PortLabel{"bus1", Signal::v_D});
  CHECK(sys.input_labels[2] == PortLabel{"bus2", Signal::v_D});
  CHECK(sys.input_labels[4] == PortLabel{"sg1", Signal::T_m});
  CHECK(sys.input_labels[5] == PortLabel{"ibr1", Signal::i_dc});
  REQUIRE(sys.output_labels.size() == 7);
  CHECK(sys.output_labels[0] == PortLabel{"bus1", Signal::i_D});
  CHECK(sys.output_labels[2] == PortLabel{"bus2", Signal::i_D});
  CHECK(sys.output_labels[4] == PortLabel{"sg1", Signal::omega});
  CHECK(sys.output_labels[5] == PortLabel{"ibr1", Signal::omega});
  CHECK(sys.output_labels[6] == PortLabel{"ibr1", Signal::v_dc});
  CHECK(sys.num_states() == g1.num_states() + g2.num_states() + 8);
}

TEST_CASE("assembled pole set survives apparatus reordering and a frame shift") {
  auto sg = make_sg();
  auto ibr = make_ibr();
  ibr.bus = "bus2";
  const double wb = omega_base_of(sg.params);
  auto grid = stack_models(rlc_grid({"bus1"}, 0.05, 0.02, 0.4, wb),
                           rlc_grid({"bus2"}, 0.05, 0.01, 0.2, wb));

  auto build = [&](double shift, bool swapped) {
    auto ss_sg = solve_steady_state(sg, {0.5, 0.1, 1.0, 0.0 + shift});
    auto ss_ibr = solve_steady_state(ibr, {0.4, 0.0, 1.0, -0.2 + shift});
    auto a = sg;
    a.params = ss_sg.params;
    auto b = ibr;
    b.params = ss_ibr.params;
    auto g1 = global_model(a, ss_sg);
    auto g2 = global_model(b, ss_ibr);
    if (swapped) return assemble_system({b, a}, {g2, g1}, grid);
    return assemble_system({a, b}, {g1, g2}, grid);
  };

  const auto base = eigenvalues(build(0.0, false));
  CHECK(oracles::max_match_distance(base, eigenvalues(build(0.0, true))) < 1e-9);
  CHECK(oracles::max_match_distance(base, eigenvalues(build(0.3, false))) < 1e-9);
}

TEST_CASE("embedding demands the terminal and speed ports") {
  StateSpaceModel bare(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Ones(1, 1),
                       Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1),
                       {{"x", Signal::v_d}}, {{"x", Signal::i_d}});
  OperatingPoint op;
  op.state = Eigen::VectorXd::Zero(1);
  op.input = Eigen::Vector3d(1.0, 0.0, 0.0);
  CHECK_THROWS_AS((void)map_to_global(bare, op, 377.0), ConfigError);
}
