#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pcmpc/common/error.hpp"
#include "pcmpc/galerkin/expanded_ode.hpp"
#include "pcmpc/galerkin/projection_tensor.hpp"
#include "pcmpc/odeint/dopri5.hpp"
#include "pcmpc/odeint/sensitivity.hpp"
#include "pcmpc/wobench/williams_otto.hpp"

using namespace pcmpc;
using doctest::Approx;

namespace {

odeint::RhsFn decay() {
  return [](const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>&,
            Eigen::Ref<Eigen::VectorXd> dy) { dy = -y; };
}

odeint::InputSchedule no_inputs(double t0, double tf) {
  odeint::InputSchedule s;
  s.breaks = {t0, tf};
  s.values.resize(0, 1);
  return s;
}

// dx/dt = a x + u with a deterministic order-0 basis.
galerkin::ExpandedOde linear_scalar(double a) {
  auto b = std::make_shared<polychaos::OrthoBasis>(
      polychaos::OrthoBasis::uniform_family(polychaos::Family::Hermite, 1, 0));
  galerkin::PolynomialOde m(1, 1);
  const int u = m.add_input_function(galerkin::InputFunction::power(0, 1.0));
  m.add_term(0, 1.0, {0}, u);
  if (a != 0.0) m.add_term(0, a, {1});
  const galerkin::ProjectionTensor t(b, 1);
  return galerkin::project_dynamics(m, b, t);
}

odeint::InputSchedule single_parameter(double value, double t0, double tf) {
  odeint::InputSchedule s;
  s.breaks = {t0, tf};
  s.values = Eigen::MatrixXd::Constant(1, 1, value);
  s.du_dpi = {Eigen::MatrixXd::Ones(1, 1)};
  s.n_pi = 1;
  return s;
}

}  // namespace

TEST_CASE("exponential decay") {
  const auto tr = odeint::integrate(decay(), Eigen::VectorXd::Ones(1), no_inputs(0, 1), 0.0, 1.0);
  CHECK(std::abs(tr.final()[0] - 0.3678794) < 1e-6);
  CHECK(std::abs(tr.final()[0] - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("dense output between grid points") {
  odeint::IntegratorConfig ic;
  ic.dense_output = true;
  const auto tr = odeint::integrate(decay(), Eigen::VectorXd::Ones(1), no_inputs(0, 3), 0.0, 3.0, {}, ic);
  for (double t : {0.3, 1.1, 2.71})
    CHECK(std::abs(tr.at(t)[0] - std::exp(-t)) < 1e-7);
}

TEST_CASE("piecewise-constant input") {
  const auto rhs = [](const Eigen::Ref<const Eigen::VectorXd>&, const Eigen::Ref<const Eigen::VectorXd>& u,
                      Eigen::Ref<Eigen::VectorXd> dy) { dy[0] = u[0]; };
  odeint::InputSchedule s;
  s.breaks = {0.0, 1.0, 1.5};
  s.values.resize(1, 2);
  s.values << 2.0, -4.0;
  const auto tr = odeint::integrate(rhs, Eigen::VectorXd::Zero(1), s, 0.0, 1.5, {1.0});
  CHECK(tr.at(1.0)[0] == Approx(2.0).epsilon(1e-12));
  CHECK(tr.final()[0] == Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("Williams-Otto without feed, B or C stays constant") {
  const wobench::WoConfig cfg;
  const auto m = wobench::build_model(cfg);
  Eigen::VectorXd x0(8);
  x0 << 10, 0, 0, 0.3, 0.2, 0.1, 2, 0.5;
  const auto s = odeint::InputSchedule::constant(Eigen::Vector2d(0.0, 340.0), 0.0, 4000.0);
  const auto tr = odeint::integrate(*m.lifted, m.lifted->parameter_means(), x0, s, 0.0, 4000.0);
  CHECK((tr.final() - x0).norm() < 1e-12);
}

TEST_CASE("time grid and schedule validation") {
  odeint::InputSchedule s;
  s.breaks = {0.0, 1.0, 2.0};
  s.values = Eigen::MatrixXd::Zero(1, 2);
  const auto g = odeint::time_grid(0.0, 2.0, s, {0.5, 1.0, 3.0});
  CHECK(g == std::vector<double>{0.0, 0.5, 1.0, 2.0});
  odeint::InputSchedule bad;
  bad.breaks = {0.0, 1.0};
  bad.values = Eigen::MatrixXd::Zero(1, 3);
  CHECK_THROWS(bad.validate());
}

TEST_CASE("step budget exhaustion raises IntegrationError") {
  odeint::IntegratorConfig ic;
  ic.max_steps = 3;
  CHECK_THROWS_AS(odeint::integrate(decay(), Eigen::VectorXd::Ones(1), no_inputs(0, 100), 0.0, 100.0, {}, ic),
                  IntegrationError);
}

TEST_CASE("blow-up raises IntegrationError") {
  const auto rhs = [](const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>&,
                      Eigen::Ref<Eigen::VectorXd> dy) { dy[0] = y[0] * y[0]; };
  CHECK_THROWS_AS(odeint::integrate(rhs, Eigen::VectorXd::Ones(1), no_inputs(0, 2), 0.0, 2.0), IntegrationError);
}

TEST_CASE("sensitivity of a pure integrator") {
  const auto ode = linear_scalar(0.0);
  const auto sol = odeint::integrate_with_sensitivities(ode, Eigen::VectorXd::Zero(1), single_parameter(0.8, 0, 2),
                                                        0.0, 2.0, {0.5, 1.3});
  for (double t : {0.5, 1.3, 2.0}) {
    const int i = sol.find(t);
    REQUIRE(i >= 0);
    CHECK(sol.S[i](0, 0) == Approx(t).epsilon(1e-12));
    CHECK(sol.x[i][0] == Approx(0.8 * t).epsilon(1e-12));
  }
}

TEST_CASE("sensitivity of a stable linear system") {
  const auto ode = linear_scalar(-1.0);
  const auto sol = odeint::integrate_with_sensitivities(ode, Eigen::VectorXd::Zero(1), single_parameter(0.3, 0, 3),
                                                        0.0, 3.0, {0.7, 1.9});
  for (double t : {0.7, 1.9, 3.0}) {
    const int i = sol.find(t);
    CHECK(std::abs(sol.S[i](0, 0) - (1.0 - std::exp(-t))) < 1e-8);
  }
}

TEST_CASE("expanded Williams-Otto sensitivities against central differences") {
  wobench::WoConfig cfg;
  cfg.order = 1;
  const auto wm = wobench::build_model(cfg);
  const galerkin::ProjectionTensor t(wm.basis, 2);
  const auto ode = galerkin::project_dynamics(*wm.lifted, wm.basis, t);
  const auto x0 = wobench::initial_coefficients(wm, Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), 7), 0.01);
  const int N = 4;
  const double T = 1000.0;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.2, 0.8);
  Eigen::VectorXd pi(2 * N);
  for (auto& v : pi) v = U(rng);
  const auto sched = [&](const Eigen::VectorXd& p) {
    odeint::InputSchedule s;
    for (int i = 0; i <= N; ++i) s.breaks.push_back(T * i / N);
    s.values.resize(2, N);
    s.n_pi = 2 * N;
    for (int i = 0; i < N; ++i) {
      s.values(0, i) = 0.002 * p[2 * i];
      s.values(1, i) = 313.0 + 50.0 * p[2 * i + 1];
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2 * N);
      d(0, 2 * i) = 0.002;
      d(1, 2 * i + 1) = 50.0;
      s.du_dpi.push_back(d);
    }
    return s;
  };
  odeint::IntegratorConfig ic;
  ic.rel_tol = 1e-11;
  ic.abs_tol = 1e-13;
  const auto sol = odeint::integrate_with_sensitivities(ode, x0, sched(pi), 0.0, T, {}, ic);
  CHECK(sol.sensitivity_equations == static_cast<long>(ode.dim()) * 2 * N);
  const Eigen::MatrixXd& S = sol.S.back();
  for (int j = 0; j < 2 * N; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(pi[j]));
    Eigen::VectorXd pp = pi, pm = pi;
    pp[j] += h;
    pm[j] -= h;
    const Eigen::VectorXd fd = (odeint::integrate(ode, x0, sched(pp), 0.0, T, {}, ic).final() -
                                odeint::integrate(ode, x0, sched(pm), 0.0, T, {}, ic).final()) /
                               (2 * h);
    for (int r = 0; r < ode.dim(); ++r)
      CHECK(std::abs(fd[r] - S(r, j)) <= std::max(1e-4 * std::abs(fd[r]), 1e-7));
  }
}
