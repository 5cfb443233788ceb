#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "gridport/power_flow.hpp"

using namespace gridport;
using cd = std::complex<double>;

namespace {

BusSpec bus(const std::string& id, BusKind kind, double shunt = 0.0) {
  BusSpec b;
  b.id = id;
  b.kind = kind;
  b.shunt_c = shunt;
  return b;
}

BranchSpec line(const std::string& f, const std::string& t, double r, double x,
                double b = 0.0, double tap = 1.0) {
  return {f, t, r, x, b, tap};
}

// Independent fixed-point solver for networks without PV buses.
std::vector<cd> gauss_seidel(const NetworkData& net, int sweeps) {
  const auto y = build_nodal_admittance(net).at(cd(0.0, 0.0));
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  std::vector<cd> v(static_cast<size_t>(n));
  Eigen::Index slack = -1;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& b = net.buses[static_cast<size_t>(k)];
    if (b.kind == BusKind::slack) {
      slack = k;
      v[static_cast<size_t>(k)] = std::polar(b.v_set, b.theta_set);
    } else {
      v[static_cast<size_t>(k)] = std::polar(1.0, b.theta_set);
    }
  }
  for (int it = 0; it < sweeps; ++it) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == slack) continue;
      const auto& b = net.buses[static_cast<size_t>(k)];
      const cd s_spec(b.p_gen - b.p_load, b.q_gen - b.q_load);
      cd sum(0.0, 0.0);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != k) sum += y(k, j) * v[static_cast<size_t>(j)];
      }
      v[static_cast<size_t>(k)] =
          (std::conj(s_spec / v[static_cast<size_t>(k)]) - sum) / y(k, k);
    }
  }
  return v;
}

// Every solved injection must reproduce the power balance on the phasor
// admittance, and the scheduled quantities must be honored per bus kind.
void check_solution_consistency(const NetworkData& net, const PowerFlowSolution& sol) {
  const auto y = build_nodal_admittance(net).at(cd(0.0, 0.0));
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const cd vk = std::polar(sol.v_mag(k), sol.theta(k));
    cd i(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) i += y(k, j) * std::polar(sol.v_mag(j), sol.theta(j));
    const cd s = vk * std::conj(i);
    CHECK(std::abs(s.real() - sol.p_inj(k)) < 1e-8);
    CHECK(std::abs(s.imag() - sol.q_inj(k)) < 1e-8);

    const auto& b = net.buses[static_cast<size_t>(k)];
    if (b.kind == BusKind::slack) {
      CHECK(sol.v_mag(k) == doctest::Approx(b.v_set).epsilon(1e-12));
      CHECK(sol.theta(k) == doctest::Approx(b.theta_set).epsilon(1e-12));
    } else if (b.kind == BusKind::pv) {
      CHECK(sol.v_mag(k) == doctest::Approx(b.v_set).epsilon(1e-10));
      CHECK(std::abs(sol.p_inj(k) - (b.p_gen - b.p_load)) < 1e-8);
    } else {
      CHECK(std::abs(sol.p_inj(k) - (b.p_gen - b.p_load)) < 1e-8);
      CHECK(std::abs(sol.q_inj(k) - (b.q_gen - b.q_load)) < 1e-8);
    }
  }
}

NetworkData ieee14() {
  NetworkData net;
  auto add = [&](const std::string& id, BusKind kind, double v_set, double pg, double pl,
                 double ql, double shunt) {
    BusSpec b;
    b.id = id;
    b.kind = kind;
    b.v_set = v_set;
    b.p_gen = pg;
    b.p_load = pl;
    b.q_load = ql;
    b.shunt_c = shunt;
    net.buses.push_back(b);
  };
  add("1", BusKind::slack, 1.060, 0.0, 0.0, 0.0, kDefaultShuntC);
  add("2", BusKind::pv, 1.045, 0.40, 0.217, 0.127, kDefaultShuntC);
  add("3", BusKind::pv, 1.010, 0.0, 0.942, 0.190, kDefaultShuntC);
  add("4", BusKind::pq, 1.0, 0.0, 0.478, -0.039, kDefaultShuntC);
  add("5", BusKind::pq, 1.0, 0.0, 0.076, 0.016, kDefaultShuntC);
  add("6", BusKind::pv, 1.070, 0.0, 0.112, 0.075, kDefaultShuntC);
  add("7", BusKind::pq, 1.0, 0.0, 0.0, 0.0, kDefaultShuntC);
  add("8", BusKind::pv, 1.090, 0.0, 0.0, 0.0, kDefaultShuntC);
  add("9", BusKind::pq, 1.0, 0.0, 0.295, 0.166, 0.19);
  add("10", BusKind::pq, 1.0, 0.0, 0.090, 0.058, kDefaultShuntC);
  add("11", BusKind::pq, 1.0, 0.0, 0.035, 0.018, kDefaultShuntC);
  add("12", BusKind::pq, 1.0, 0.0, 0.061, 0.016, kDefaultShuntC);
  add("13", BusKind::pq, 1.0, 0.0, 0.135, 0.058, kDefaultShuntC);
  add("14", BusKind::pq, 1.0, 0.0, 0.149, 0.050, kDefaultShuntC);
  net.branches = {
      line("1", "2", 0.01938, 0.05917, 0.0528),  line("1", "5", 0.05403, 0.22304, 0.0492),
      line("2", "3", 0.04699, 0.19797, 0.0438),  line("2", "4", 0.05811, 0.17632, 0.0340),
      line("2", "5", 0.05695, 0.17388, 0.0346),  line("3", "4", 0.06701, 0.17103, 0.0128),
      line("4", "5", 0.01335, 0.04211, 0.0),     line("4", "7", 0.0, 0.20912, 0.0, 0.978),
      line("4", "9", 0.0, 0.55618, 0.0, 0.969),  line("5", "6", 0.0, 0.25202, 0.0, 0.932),
      line("6", "11", 0.09498, 0.19890, 0.0),    line("6", "12", 0.12291, 0.25581, 0.0),
      line("6", "13", 0.06615, 0.13027, 0.0),    line("7", "8", 0.0, 0.17615, 0.0),
      line("7", "9", 0.0, 0.11001, 0.0),         line("9", "10", 0.03181, 0.08450, 0.0),
      line("9", "14", 0.12711, 0.27038, 0.0),    line("10", "11", 0.08205, 0.19207, 0.0),
      line("12", "13", 0.22092, 0.19988, 0.0),   line("13", "14", 0.17093, 0.34802, 0.0)};
  return net;
}

}  // namespace

TEST_CASE("power flow on an unloaded line is flat") {
  NetworkData net;
  net.buses = {bus("s", BusKind::slack), bus("t", BusKind::pq)};
  net.buses[0].v_set = 1.06;
  net.buses[0].theta_set = 0.1;
  net.branches = {line("s", "t", 0.01, 0.1)};
  const auto sol = solve_power_flow(net);
  CHECK(sol.v_mag(1) == doctest::Approx(1.06).epsilon(1e-10));
  CHECK(sol.theta(1) == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(sol.iterations <= 4);
  check_solution_consistency(net, sol);
}

TEST_CASE("power flow agrees with a Gauss-Seidel fixed point") {
  NetworkData net;
  net.buses = {bus("a", BusKind::slack, 0.01), bus("b", BusKind::pq, 0.02),
               bus("c", BusKind::pq)};
  net.buses[0].v_set = 1.02;
  net.buses[1].p_load = 0.5;
  net.buses[1].q_load = 0.2;
  net.buses[2].p_load = 0.3;
  net.buses[2].q_load = -0.05;
  net.branches = {line("a", "b", 0.02, 0.10), line("b", "c", 0.04, 0.25),
                  line("a", "c", 0.01, 0.15, 0.02)};
  const auto sol = solve_power_flow(net);
  const auto v_gs = gauss_seidel(net, 4000);
  for (Eigen::Index k = 0; k < 3; ++k) {
    CHECK(sol.v_mag(k) == doctest::Approx(std::abs(v_gs[static_cast<size_t>(k)])).epsilon(1e-6));
    CHECK(sol.theta(k) ==
          doctest::Approx(std::arg(v_gs[static_cast<size_t>(k)])).epsilon(1e-5));
  }
  check_solution_consistency(net, sol);
}

TEST_CASE("power flow holds the magnitude at a voltage-controlled bus") {
  NetworkData net;
  net.buses = {bus("a", BusKind::slack, 0.01), bus("g", BusKind::pv), bus("d", BusKind::pq)};
  net.buses[1].v_set = 1.03;
  net.buses[1].p_gen = 0.4;
  net.buses[1].p_load = 0.1;
  net.buses[2].p_load = 0.6;
  net.buses[2].q_load = 0.25;
  net.branches = {line("a", "g", 0.01, 0.12), line("g", "d", 0.02, 0.2),
                  line("a", "d", 0.015, 0.18)};
  const auto sol = solve_power_flow(net);
  check_solution_consistency(net, sol);
  CHECK(sol.residuals.back() < 1e-8);
}

TEST_CASE("fourteen-bus benchmark reproduces the published profile") {
  const auto net = ieee14();
  const auto sol = solve_power_flow(net);
  check_solution_consistency(net, sol);
  CHECK(sol.iterations <= 10);

  const double published[14] = {1.060, 1.045, 1.010, 1.018, 1.020, 1.070, 1.062,
                                1.090, 1.056, 1.051, 1.057, 1.055, 1.050, 1.036};
  for (int k = 0; k < 14; ++k) {
    CHECK(std::abs(sol.v_mag(k) - published[k]) < 0.01);
  }
  // slack generation and the deepest angle, well-known for this case
  CHECK(sol.p_inj(0) == doctest::Approx(2.324).epsilon(0.01));
  CHECK(sol.theta(13) * 180.0 / kPi == doctest::Approx(-16.03).epsilon(0.02));
}

TEST_CASE("branch flows balance the losses") {
  NetworkData net;
  net.buses = {bus("a", BusKind::slack), bus("b", BusKind::pq)};
  net.buses[1].p_load = 0.4;
  net.buses[1].q_load = 0.1;
  net.branches = {line("a", "b", 0.03, 0.2)};
  const auto sol = solve_power_flow(net);
  const double loss = sol.p_from(0) + sol.p_to(0);
  CHECK(loss > 0.0);
  // receiving end feeds the load exactly
  CHECK(sol.p_to(0) == doctest::Approx(-0.4).epsilon(1e-8));
  // loss equals I^2 R on the series element
  const cd vf = std::polar(sol.v_mag(0), sol.theta(0));
  const cd vt = std::polar(sol.v_mag(1), sol.theta(1));
  const cd i = (vf - vt) / cd(0.03, 0.2);
  CHECK(loss == doctest::Approx(std::norm(i) * 0.03).epsilon(1e-8));
}

TEST_CASE("hopeless loading reports the residual history") {
  NetworkData net;
  net.buses = {bus("a", BusKind::slack), bus("b", BusKind::pq)};
  net.buses[1].p_load = 50.0;
  net.branches = {line("a", "b", 0.01, 0.5)};
  try {
    (void)solve_power_flow(net);
    FAIL("expected divergence");
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("converge") != std::string::npos);
    CHECK(msg.find("residual") != std::string::npos);
  }
}
