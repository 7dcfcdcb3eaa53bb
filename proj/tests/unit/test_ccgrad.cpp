#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "pcmpc/ccgrad/gradient.hpp"
#include "pcmpc/ccgrad/polynomial.hpp"
#include "pcmpc/common/error.hpp"
#include "pcmpc/galerkin/projection_tensor.hpp"
#include "pcmpc/odeint/dopri5.hpp"
#include "pcmpc/wobench/williams_otto.hpp"

using namespace pcmpc;
using namespace pcmpc::ccgrad;
using chance::ConstraintFunction;
using chance::ConstraintSet;
using polychaos::Family;
using doctest::Approx;

namespace {

polychaos::BasisPtr hermite(int n, int P) {
  return std::make_shared<polychaos::OrthoBasis>(polychaos::OrthoBasis::uniform_family(Family::Hermite, n, P));
}

// Single state x with the given coefficients and constraint g = x <= 0.
struct OneState {
  polychaos::BasisPtr basis;
  ConstraintSet cs;
  std::vector<Eigen::VectorXd> X;
  OneState(polychaos::BasisPtr b, Eigen::VectorXd c) : basis(b), cs(b, 1), X{std::move(c)} {
    cs.add(ConstraintFunction::affine(cs.add_time(0.0), 0, 1.0, 0.0));
  }
};

}  // namespace

TEST_CASE("slices of simple constraints") {
  const auto b = hermite(2, 1);
  OneState s(b, Eigen::Vector3d(-1.0, 1.0, 1.0));  // xi1 + xi2 - 1
  const auto p = univariate_slice(s.cs, 0, s.X, Eigen::Vector2d(9.0, 0.25), 0);
  CHECK(p.degree() == 1);
  CHECK(p.c[0] == Approx(-0.75));
  CHECK(p.c[1] == Approx(1.0));

  const auto b2 = hermite(2, 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(b2->size());
  c[b2->indices().find(std::vector<int>{2, 0})] = 1.0;  // He2(xi1) = xi1^2 - 1
  OneState q(b2, c);
  const auto r = univariate_slice(q.cs, 0, q.X, Eigen::Vector2d(0.0, 3.0), 0);
  CHECK(r.degree() == 2);
  CHECK(r.c[0] == Approx(-1.0));
  CHECK(std::abs(r.c[1]) < 1e-12);
  CHECK(r.c[2] == Approx(1.0));
}

TEST_CASE("real roots") {
  Polynomial p{Eigen::Vector3d(-1, 0, 1)};
  auto r = real_roots(p, -INFINITY, INFINITY);
  REQUIRE(r.ok);
  REQUIRE(r.roots.size() == 2u);
  CHECK(r.roots[0] == Approx(-1.0).epsilon(1e-12));
  CHECK(r.roots[1] == Approx(1.0).epsilon(1e-12));
  CHECK(real_roots(Polynomial{Eigen::Vector3d(1, 0, 1)}, -INFINITY, INFINITY).roots.empty());
  CHECK_FALSE(real_roots(Polynomial{Eigen::Vector3d(1, -2, 1)}, -INFINITY, INFINITY).ok);
  Polynomial cubic{Eigen::Vector4d(6, -11, 6, -1)};  // -(t-1)(t-2)(t-3)
  r = real_roots(cubic, 1.5, 10.0);
  REQUIRE(r.roots.size() == 2u);
  CHECK(r.roots[0] == Approx(2.0));
  CHECK(r.roots[1] == Approx(3.0));
  const auto lim = find_integration_limits({Polynomial{Eigen::Vector3d(-1, 0, 1)}}, -INFINITY, INFINITY);
  REQUIRE(lim);
  CHECK(lim->limits.size() == 4u);
  CHECK(lim->owner.front() == -1);
  CHECK(lim->owner[1] == 0);
  const auto none = find_integration_limits({Polynomial{Eigen::Vector3d(1, 0, 1)}}, -INFINITY, INFINITY);
  REQUIRE(none);
  CHECK(none->limits.size() == 2u);
  std::string why;
  CHECK_FALSE(find_integration_limits({Polynomial{Eigen::Vector3d(1, -2, 1)}}, -INFINITY, INFINITY, {}, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("Chebyshev interpolation reproduces a cubic") {
  const auto f = [](double t) { return 0.3 - 2.0 * t + 0.5 * t * t * t; };
  const auto p = interpolate_chebyshev(f, 3);
  for (double t : {-3.0, -0.4, 1.1, 5.0}) CHECK(p(t) == Approx(f(t)).epsilon(1e-12));
}

TEST_CASE("smooth estimator on analytic cases") {
  const auto b = hermite(1, 2);
  const polychaos::SampleMatrix s(37, {Family::Hermite}, 5);
  for (double c : {-1.0, 0.0, 0.8}) {
    OneState q(b, Eigen::Vector3d(-c, 1.0, 0.0));
    CHECK(smooth_probability(q.cs, q.X, s) == Approx(oracle::Phi(c)).epsilon(1e-14));
  }
  OneState sq(b, Eigen::Vector3d(0.0, 0.0, 1.0));
  CHECK(smooth_probability(sq.cs, sq.X, s) == Approx(0.682689).epsilon(1e-6));

  const auto b2 = hermite(2, 1);
  OneState sum(b2, Eigen::Vector3d(0.0, 1.0, 1.0));
  const polychaos::SampleMatrix s2(100000, {Family::Hermite, Family::Hermite}, 6);
  CHECK(std::abs(smooth_probability(sum.cs, sum.X, s2) - 0.5) < 0.003);
}

TEST_CASE("gradient of a shifted Gaussian is the density") {
  const auto b = hermite(1, 1);
  const polychaos::SampleMatrix s(13, {Family::Hermite}, 2);
  for (double xt : {-1.0, 0.0, 1.0}) {
    OneState q(b, Eigen::Vector2d(-xt, 1.0));  // g = xi1 - X
    const auto g = gradient(q.cs, q.X, s);
    CHECK(std::abs(-g.dP_dX[0][0] - oracle::phi(xt)) < 1e-12);
    CHECK(std::abs(g.dP_dX_alt[0][0] - g.dP_dX[0][0]) < 1e-14);
  }
}

TEST_CASE("gradient of a two-variable sum") {
  const auto b = hermite(2, 1);
  OneState q(b, Eigen::Vector3d(0.0, 1.0, 1.0));  // g = xi1 + xi2 - c, c = 0
  const polychaos::SampleMatrix s(100000, {Family::Hermite, Family::Hermite}, 9);
  const auto g = gradient(q.cs, q.X, s);
  CHECK(std::abs(std::abs(g.dP_dX[0][0]) - oracle::phi(0.0) / std::sqrt(2.0)) < 0.005);
  CHECK(g.max_route_difference < 1e-10);
}

TEST_CASE("chain rule through sensitivities") {
  const auto b = hermite(1, 1);
  OneState q(b, Eigen::Vector2d(-0.3, 1.0));
  Eigen::MatrixXd S(2, 2);
  S << 2.0, -1.0, 0.5, 0.0;
  const polychaos::SampleMatrix s(11, {Family::Hermite}, 1);
  const auto g = gradient(q.cs, q.X, s, {S});
  CHECK((g.dP_dpi - S.transpose() * g.dP_dX[0]).norm() < 1e-14);
}

TEST_CASE("all samples discarded is an error") {
  const auto b = hermite(1, 2);
  OneState q(b, Eigen::Vector3d(2.0, -2.0, 1.0));  // (xi - 1)^2: a double root in every sample
  const polychaos::SampleMatrix s(5, {Family::Hermite}, 1);
  CHECK_THROWS_AS(smooth_probability(q.cs, q.X, s), ConvergenceError);
}

TEST_CASE("Williams-Otto terminal slices and finite differences of the smooth estimator") {
  wobench::WoConfig cfg;
  cfg.order = 2;
  const auto wm = wobench::build_model(cfg);
  const galerkin::ProjectionTensor t(wm.basis, 2);
  const auto ode = galerkin::project_dynamics(*wm.lifted, wm.basis, t);
  const auto x0 = wobench::initial_coefficients(wm, Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), 7), 0.01);
  odeint::InputSchedule sched;
  sched.breaks = {0.0, 1000.0, 2500.0};
  sched.values.resize(2, 2);
  sched.values << 0.0, 0.002, 330.0, 335.0;
  const auto tr = odeint::integrate(ode, x0, sched, 0.0, 2500.0);
  // Limits placed near the realized terminal values so both constraints bind.
  chance::ConstraintSet near(wm.basis, wobench::kStates);
  const int tt = near.add_time(2500.0);
  const int n = ode.n_terms();
  near.add(ConstraintFunction::affine(tt, 5, 1.0, -tr.final()[5 * n] - 0.002));
  near.add(ConstraintFunction::affine(tt, 6, 1.0, -tr.final()[6 * n] - 0.03));
  const std::vector<Eigen::VectorXd> X{tr.final()};

  const SliceBuilder sb(near, X, wobench::kVolumeVar);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> N;
  Eigen::VectorXd xi(wobench::kNxi);
  for (auto& v : xi) v = N(rng);
  const auto slices = sb.slices(xi);
  for (int k = 0; k < 20; ++k) {
    const double at = N(rng) * 2.0;
    for (int i = 0; i < 2; ++i) CHECK(std::abs(slices[i](at) - sb.direct(i, xi, at)) < 1e-9);
  }

  const polychaos::SampleMatrix s(2000, std::vector<Family>(wobench::kNxi, Family::Hermite), 31);
  GradConfig gc;
  gc.slice_var = wobench::kVolumeVar;
  const auto g = gradient(near, X, s, {}, gc);
  CHECK(g.p_smooth > 0.05);
  CHECK(g.p_smooth < 0.95);
  for (int j : {5 * n, 5 * n + 1, 6 * n, 6 * n + wobench::kVolumeVar + 1, 3 * n}) {
    const double h = 1e-5;
    std::vector<Eigen::VectorXd> Xp = X, Xm = X;
    Xp[0][j] += h;
    Xm[0][j] -= h;
    const double fd = (smooth_probability(near, Xp, s, gc) - smooth_probability(near, Xm, s, gc)) / (2 * h);
    CHECK(std::abs(fd - g.dP_dX[0][j]) <= 1e-3 * std::max(std::abs(fd), 1e-3));
  }
}
