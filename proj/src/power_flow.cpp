#include <cmath>
#include <complex>
#include <sstream>

#include "gridport/errors.hpp"
#include "gridport/power_flow.hpp"

namespace gridport {

namespace {

using cd = std::complex<double>;

struct Injection {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};

// net complex power flowing out of every bus for the voltage profile
Injection injections(const Eigen::MatrixXcd& y, const Eigen::VectorXd& vm,
                     const Eigen::VectorXd& th) {
  const auto n = vm.size();
  Injection out;
  out.p = Eigen::VectorXd::Zero(n);
  out.q = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cd i(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) i += y(k, j) * std::polar(vm(j), th(j));
    const cd s = std::polar(vm(k), th(k)) * std::conj(i);
    out.p(k) = s.real();
    out.q(k) = s.imag();
  }
  return out;
}

}  // namespace

PowerFlowSolution solve_power_flow(const NetworkData& net) {
  validate(net);
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  const Eigen::MatrixXcd y = build_nodal_admittance(net).at(cd(0.0, 0.0));
  const Eigen::MatrixXd g = y.real();
  const Eigen::MatrixXd b = y.imag();

  Eigen::Index slack = -1;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (net.buses[static_cast<size_t>(k)].kind == BusKind::slack) slack = k;
  }

  std::vector<Eigen::Index> ang, vmg;  // unknown angles, unknown magnitudes
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kind = net.buses[static_cast<size_t>(k)].kind;
    if (kind != BusKind::slack) ang.push_back(k);
    if (kind == BusKind::pq) vmg.push_back(k);
  }
  const auto na = static_cast<Eigen::Index>(ang.size());
  const auto nv = static_cast<Eigen::Index>(vmg.size());

  Eigen::VectorXd p_spec(n), q_spec(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& spec = net.buses[static_cast<size_t>(k)];
    p_spec(k) = spec.p_gen - spec.p_load;
    q_spec(k) = spec.q_gen - spec.q_load;
  }

  Eigen::VectorXd vm(n), th(n);
  const double th0 = net.buses[static_cast<size_t>(slack)].theta_set;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& spec = net.buses[static_cast<size_t>(k)];
    vm(k) = (spec.kind == BusKind::pq) ? 1.0 : spec.v_set;
    th(k) = th0;
  }

  auto mismatch = [&](const Injection& inj) {
    Eigen::VectorXd f(na + nv);
    for (Eigen::Index i = 0; i < na; ++i) f(i) = p_spec(ang[i]) - inj.p(ang[i]);
    for (Eigen::Index i = 0; i < nv; ++i) f(na + i) = q_spec(vmg[i]) - inj.q(vmg[i]);
    return f;
  };

  std::vector<double> residuals;
  int iterations = 0;
  constexpr double tol = 1e-8;
  constexpr int max_iter = 30;

  while (true) {
    const Injection inj = injections(y, vm, th);
    const Eigen::VectorXd f = mismatch(inj);
    const double res = (na + nv) ? f.lpNorm<Eigen::Infinity>() : 0.0;
    residuals.push_back(res);
    if (res < tol) break;
    if (iterations >= max_iter) {
      std::ostringstream msg;
      msg << "power flow did not converge after " << max_iter
          << " iterations; residual history:";
      for (double r : residuals) msg << " " << r;
      throw NumericalError(msg.str());
    }

    Eigen::MatrixXd jac(na + nv, na + nv);
    for (Eigen::Index i = 0; i < na; ++i) {
      const auto k = ang[i];
      for (Eigen::Index j = 0; j < na; ++j) {
        const auto m = ang[j];
        if (k == m) {
          jac(i, j) = -inj.q(k) - b(k, k) * vm(k) * vm(k);
        } else {
          const double tkm = th(k) - th(m);
          jac(i, j) = vm(k) * vm(m) * (g(k, m) * std::sin(tkm) - b(k, m) * std::cos(tkm));
        }
      }
      for (Eigen::Index j = 0; j < nv; ++j) {
        const auto m = vmg[j];
        if (k == m) {
          jac(i, na + j) = inj.p(k) / vm(k) + g(k, k) * vm(k);
        } else {
          const double tkm = th(k) - th(m);
          jac(i, na + j) = vm(k) * (g(k, m) * std::cos(tkm) + b(k, m) * std::sin(tkm));
        }
      }
    }
    for (Eigen::Index i = 0; i < nv; ++i) {
      const auto k = vmg[i];
      for (Eigen::Index j = 0; j < na; ++j) {
        const auto m = ang[j];
        if (k == m) {
          jac(na + i, j) = inj.p(k) - g(k, k) * vm(k) * vm(k);
        } else {
          const double tkm = th(k) - th(m);
          jac(na + i, j) =
              -vm(k) * vm(m) * (g(k, m) * std::cos(tkm) + b(k, m) * std::sin(tkm));
        }
      }
      for (Eigen::Index j = 0; j < nv; ++j) {
        const auto m = vmg[j];
        if (k == m) {
          jac(na + i, na + j) = inj.q(k) / vm(k) - b(k, k) * vm(k);
        } else {
          const double tkm = th(k) - th(m);
          jac(na + i, na + j) = vm(k) * (g(k, m) * std::sin(tkm) - b(k, m) * std::cos(tkm));
        }
      }
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) {
      throw NumericalError("power flow Jacobian is singular at iteration " +
                           std::to_string(iterations));
    }
    const Eigen::VectorXd dx = lu.solve(f);
    if (!dx.allFinite()) {
      throw NumericalError("power flow update is not finite at iteration " +
                           std::to_string(iterations));
    }
    for (Eigen::Index i = 0; i < na; ++i) th(ang[i]) += dx(i);
    for (Eigen::Index i = 0; i < nv; ++i) vm(vmg[i]) += dx(na + i);
    if (vm.minCoeff() <= 0.0) {
      std::ostringstream msg;
      msg << "power flow did not converge: voltage collapsed below zero; residual history:";
      for (double r : residuals) msg << " " << r;
      throw NumericalError(msg.str());
    }
    ++iterations;
  }

  PowerFlowSolution sol;
  sol.v_mag = vm;
  sol.theta = th;
  const Injection final_inj = injections(y, vm, th);
  sol.p_inj = final_inj.p;
  sol.q_inj = final_inj.q;
  sol.iterations = iterations;
  sol.residuals = residuals;

  const auto nb = static_cast<Eigen::Index>(net.branches.size());
  sol.p_from.resize(nb);
  sol.q_from.resize(nb);
  sol.p_to.resize(nb);
  sol.q_to.resize(nb);
  for (Eigen::Index m = 0; m < nb; ++m) {
    const auto& br = net.branches[static_cast<size_t>(m)];
    const auto f = net.bus_index(br.from);
    const auto t = net.bus_index(br.to);
    const cd vf = std::polar(vm(f), th(f));
    const cd vt = std::polar(vm(t), th(t));
    const cd ys = 1.0 / (br.r + cd(0.0, net.omega0 * br.l));
    const cd ych(0.0, net.omega0 * br.b / 2.0);
    const cd i_f = (ys + ych) / (br.tap * br.tap) * vf - ys / br.tap * vt;
    const cd i_t = (ys + ych) * vt - ys / br.tap * vf;
    const cd sf = vf * std::conj(i_f);
    const cd st = vt * std::conj(i_t);
    sol.p_from(m) = sf.real();
    sol.q_from(m) = sf.imag();
    sol.p_to(m) = st.real();
    sol.q_to(m) = st.imag();
  }
  return sol;
}

}  // namespace gridport
