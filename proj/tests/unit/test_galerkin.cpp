#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "pcmpc/common/error.hpp"
#include "pcmpc/galerkin/expanded_ode.hpp"
#include "pcmpc/galerkin/projection_tensor.hpp"
#include "pcmpc/odeint/dopri5.hpp"
#include "pcmpc/wobench/williams_otto.hpp"

using namespace pcmpc;
using namespace pcmpc::galerkin;
using polychaos::Family;
using polychaos::OrthoBasis;
using polychaos::PCExpansion;
using doctest::Approx;

namespace {

polychaos::BasisPtr hermite(int n, int P) {
  return std::make_shared<OrthoBasis>(OrthoBasis::uniform_family(Family::Hermite, n, P));
}

double He(int n, double x) {
  double a = 1.0, b = x;
  if (n == 0) return a;
  for (int k = 1; k < n; ++k) {
    const double c = x * b - k * a;
    a = b;
    b = c;
  }
  return b;
}

}  // namespace

TEST_CASE("triple products in one dimension") {
  const ProjectionTensor t1(hermite(1, 1), 2, false);
  CHECK(t1.value(std::vector<int>{1, 1}, 0) == Approx(1.0));
  CHECK(std::abs(t1.value(std::vector<int>{1, 1}, 1)) < 1e-14);
  const ProjectionTensor t2(hermite(1, 2), 2, false);
  CHECK(t2.value(std::vector<int>{1, 1}, 2) == Approx(1.0));
  const double q = oracle::gauss_expect([](double x) { return He(1, x) * He(1, x) * He(2, x); }) /
                   oracle::gauss_expect([](double x) { return He(2, x) * He(2, x); });
  CHECK(t2.value(std::vector<int>{1, 1}, 2) == Approx(q).epsilon(1e-10));
}

TEST_CASE("multivariate entries match quadrature") {
  const auto b = hermite(2, 3);
  const ProjectionTensor t(b, 2, true);
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pick(0, b->size() - 1);
  for (int trial = 0; trial < 40; ++trial) {
    const int i = pick(rng), j = pick(rng), p = pick(rng), o = pick(rng);
    const auto a = [&](int k) { return std::vector<int>(b->indices()[k].begin(), b->indices()[k].end()); };
    double ref = 1.0;
    for (int d = 0; d < 2; ++d)
      ref *= oracle::gauss_expect([&](double x) {
        return He(a(i)[d], x) * He(a(j)[d], x) * He(a(p)[d], x) * He(a(o)[d], x);
      });
    ref /= b->norms()[o];
    CHECK(t.value(std::vector<int>{i, j, p}, o) == Approx(ref).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("table entries are consistent with direct values") {
  const auto b = hermite(3, 2);
  const ProjectionTensor t(b, 2, true);
  const auto& tab = t.table(2);
  CHECK(tab.nnz() > 0);
  for (std::size_t k = 0; k < tab.nnz(); k += 7) {
    const auto tup = tab.tuple(k);
    CHECK(tab.value[k] == Approx(t.value(std::vector<int>(tup.begin(), tup.end()), tab.out[k])));
  }
  CHECK(t.zero_fraction(2) > 0.5);
}

TEST_CASE("linear uncertain decay: hand Galerkin system") {
  const auto b = hermite(1, 1);
  const double p0 = 0.7, p1 = 0.2;
  PolynomialOde m(1, 0);
  const int p = m.add_parameter(PCExpansion::affine(b, p0, 0, p1));
  m.add_term(0, -1.0, {1}, -1, p);
  const ProjectionTensor t(b, 1);
  const auto ode = project_dynamics(m, b, t);
  const Eigen::Vector2d x(1.3, -0.4);
  const auto dx = ode.rhs(x, Eigen::VectorXd(0));
  CHECK(dx[0] == Approx(-p0 * x[0] - p1 * x[1]));
  CHECK(dx[1] == Approx(-p1 * x[0] - p0 * x[1]));
}

TEST_CASE("linear uncertain decay: mean against the lognormal expectation") {
  const int P = 10;
  const auto b = hermite(1, P);
  const double p0 = 1.0, p1 = 0.1, T = 1.0;
  PolynomialOde m(1, 0);
  const int p = m.add_parameter(PCExpansion::affine(b, p0, 0, p1));
  m.add_term(0, -1.0, {1}, -1, p);
  const ProjectionTensor t(b, 1);
  const auto ode = project_dynamics(m, b, t);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(b->size());
  x0[0] = 1.0;
  odeint::InputSchedule s;
  s.breaks = {0.0, T};
  s.values.resize(0, 1);
  odeint::IntegratorConfig ic;
  ic.rel_tol = 1e-11;
  ic.abs_tol = 1e-13;
  const auto tr = odeint::integrate(ode, x0, s, 0.0, T, {}, ic);
  CHECK(tr.final()[0] == Approx(std::exp(-p0 * T + 0.5 * p1 * p1 * T * T)).epsilon(1e-9));
}

TEST_CASE("input-only dynamics") {
  const auto b = hermite(2, 2);
  PolynomialOde m(1, 1);
  const int u = m.add_input_function(InputFunction::power(0, 1.0));
  m.add_term(0, 1.0, {0}, u);
  const ProjectionTensor t(b, 1);
  const auto ode = project_dynamics(m, b, t);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(b->size(), 1, 2);
  const auto dx = ode.rhs(x, Eigen::VectorXd::Constant(1, 0.37));
  CHECK(dx[0] == Approx(0.37));
  CHECK(dx.tail(b->size() - 1).norm() == 0.0);
}

TEST_CASE("quadratic term projection") {
  const auto b = hermite(1, 1);
  PolynomialOde m(1, 0);
  m.add_term(0, 1.0, {2});
  const ProjectionTensor t(b, 2);
  const auto ode = project_dynamics(m, b, t);
  const double a = 1.5, c = -0.6;
  const auto dx = ode.rhs(Eigen::Vector2d(a, c), Eigen::VectorXd(0));
  CHECK(dx[0] == Approx(a * a + c * c));
  CHECK(dx[1] == Approx(2 * a * c));
}

TEST_CASE("sparse right-hand side equals the dense oracle") {
  wobench::WoConfig cfg;
  cfg.order = 2;
  const auto wm = wobench::build_model(cfg);
  const ProjectionTensor t(wm.basis, wm.lifted->max_state_degree());
  const auto ode = project_dynamics(*wm.lifted, wm.basis, t);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXd x(ode.dim());
  for (auto& v : x) v = U(rng);
  const Eigen::Vector2d u(0.0013, 331.0);
  const auto sparse = ode.rhs(x, u);
  const auto dense = dense_rhs(*wm.lifted, t, x, u);
  CHECK((sparse - dense).norm() <= 1e-13 * dense.norm());
  CHECK(ode.kernels().size() == 12u);
}

TEST_CASE("Jacobians match finite differences") {
  wobench::WoConfig cfg;
  cfg.order = 1;
  const auto wm = wobench::build_model(cfg);
  const ProjectionTensor t(wm.basis, 2);
  const auto ode = project_dynamics(*wm.lifted, wm.basis, t);
  Eigen::VectorXd x = wobench::initial_coefficients(wm, Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), 7), 0.01);
  x += Eigen::VectorXd::LinSpaced(x.size(), 0.01, 0.2);
  const Eigen::Vector2d u(0.001, 330.0);
  const auto J = ode.jacobian_x(x, u);
  const auto Ju = ode.jacobian_u(x, u);
  for (int j = 0; j < x.size(); j += 3) {
    const double h = 1e-6;
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Eigen::VectorXd fd = (ode.rhs(xp, u) - ode.rhs(xm, u)) / (2 * h);
    CHECK((fd - J.col(j)).norm() <= 1e-6 * (1.0 + fd.norm()));
  }
  for (int c = 0; c < 2; ++c) {
    const double h = c == 0 ? 1e-7 : 1e-3;
    Eigen::Vector2d up = u, um = u;
    up[c] += h;
    um[c] -= h;
    const Eigen::VectorXd fd = (ode.rhs(x, up) - ode.rhs(x, um)) / (2 * h);
    CHECK((fd - Ju.col(c)).norm() <= 1e-5 * (1.0 + fd.norm()));
  }
}

TEST_CASE("initial condition projection") {
  const auto b = hermite(2, 3);
  std::vector<InitialValue> v;
  v.emplace_back(PCExpansion::affine(b, 4.0, 0, 0.2));
  v.emplace_back(2.5);
  const auto x = project_initial_conditions(v, b);
  const int n = b->size();
  CHECK(x[0] == Approx(4.0));
  CHECK(x[1] == Approx(0.2));
  CHECK(x.segment(2, n - 2).norm() == 0.0);
  CHECK(x[n] == 2.5);
  CHECK(x.segment(n + 1, n - 1).norm() == 0.0);

  std::vector<InitialValue> nl;
  nl.emplace_back(NonlinearInitial{[](const Eigen::VectorXd& xi) { return 1.0 / (2.0 + 0.02 * xi[1]); }});
  CHECK_THROWS_AS(project_initial_conditions(nl, b), ConfigError);
  const auto y = project_initial_conditions(nl, b, true);
  const double exact = oracle::gauss_expect([](double s) { return 1.0 / (2.0 + 0.02 * s); });
  CHECK(std::abs(y[0] - exact) < 1e-5);
}

TEST_CASE("product expansion and its Jacobians") {
  const auto b = hermite(2, 2);
  const ProjectionTensor t(b, 2);
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(b->size(), 0.5, 1.0);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(b->size(), -0.3, 0.4);
  const auto z = multiply(t, a, c, true);
  CHECK(z.z[0] == Approx((a.cwiseProduct(c).cwiseProduct(b->norms())).sum()));
  const double h = 1e-6;
  for (int j = 0; j < b->size(); ++j) {
    Eigen::VectorXd ap = a, am = a;
    ap[j] += h;
    am[j] -= h;
    const Eigen::VectorXd fd = (multiply(t, ap, c).z - multiply(t, am, c).z) / (2 * h);
    CHECK((fd - z.dz_da.col(j)).norm() < 1e-8);
  }
}

TEST_CASE("model and basis must agree") {
  const auto b = hermite(2, 1);
  PolynomialOde m(1, 0);
  m.add_term(0, 1.0, {3});
  const ProjectionTensor t(b, 2);
  CHECK_THROWS_AS(project_dynamics(m, b, t), DimensionError);
  CHECK_THROWS_AS(project_dynamics(m, hermite(3, 1), t), DimensionError);
}

TEST_CASE("expanded system JSON round trip") {
  wobench::WoConfig cfg;
  cfg.order = 1;
  const auto wm = wobench::build_model(cfg);
  const ProjectionTensor t(wm.basis, 2);
  const auto ode = project_dynamics(*wm.lifted, wm.basis, t);
  const auto back = expanded_ode_from_json(expanded_ode_to_json(ode));
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(ode.dim(), 0.1, 1.1);
  const Eigen::Vector2d u(0.002, 320.0);
  CHECK((ode.rhs(x, u) - back.rhs(x, u)).norm() == 0.0);
}
