#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "pcmpc/common/error.hpp"
#include "pcmpc/galerkin/projection_tensor.hpp"
#include "pcmpc/polychaos/samples.hpp"
#include "pcmpc/wobench/monte_carlo.hpp"
#include "pcmpc/wobench/nmpc.hpp"
#include "pcmpc/wobench/williams_otto.hpp"

using namespace pcmpc;
using namespace pcmpc::wobench;
using doctest::Approx;

namespace {

odeint::InputSchedule feed_then_hold() {
  odeint::InputSchedule s;
  s.breaks = {0.0, 1000.0, 2500.0, 4000.0};
  s.values.resize(2, 3);
  s.values << 0.002, 0.0015, 0.0, 330.0, 318.0, 350.0;
  return s;
}

odeint::IntegratorConfig tight() {
  odeint::IntegratorConfig c;
  c.rel_tol = 1e-11;
  c.abs_tol = 1e-13;
  return c;
}

Eigen::VectorXd x0_of(const WoConfig& c) { return Eigen::Map<const Eigen::VectorXd>(c.x0.data(), 7); }

}  // namespace

TEST_CASE("expansion size at order 3") {
  const auto m = build_model(WoConfig{});
  CHECK(m.basis->size() == 286);
  CHECK(7 * m.basis->size() == 2002);
  CHECK(m.lifted->n_states() == 8);
}

TEST_CASE("plant keeps stoichiometric invariants") {
  const WoConfig cfg;
  const auto tr = odeint::integrate(plant_rhs(cfg.k_mean, cfg), x0_of(cfg), feed_then_hold(), 0.0, 4000.0,
                                    export_grid(4000.0), tight());
  double v_prev = 0.0;
  for (const auto& x : tr.x) {
    // A units end up in C, P and (twice) G; E pairs with P and G.
    CHECK(x[6] * (x[0] + x[2] + x[3] + 2.0 * x[5]) == Approx(20.0).epsilon(1e-8));
    CHECK(std::abs(x[6] * (x[4] - x[3] - x[5])) < 1e-8);
    CHECK(x.minCoeff() > -1e-10);
    CHECK(x[6] >= v_prev);
    v_prev = x[6];
  }
  CHECK(tr.final()[6] == Approx(2.0 + 2.0 + 2.25));
}

TEST_CASE("lifted model reproduces the plant") {
  WoConfig cfg;
  cfg.order = 0;
  const auto m = build_model(cfg);
  Eigen::Vector3d k(cfg.k_mean[0], cfg.k_mean[1], cfg.k_mean[2]);
  const auto grid = export_grid(4000.0);
  const auto lifted = odeint::integrate(*m.lifted, k, lift(x0_of(cfg)), feed_then_hold(), 0.0, 4000.0, grid, tight());
  const auto plant = odeint::integrate(plant_rhs(cfg.k_mean, cfg), x0_of(cfg), feed_then_hold(), 0.0, 4000.0,
                                       grid, tight());
  REQUIRE(lifted.x.size() == plant.x.size());
  for (std::size_t i = 0; i < plant.x.size(); ++i) {
    CHECK(std::abs(lifted.x[i][7] * lifted.x[i][6] - 1.0) <= 1e-6);
    CHECK((lifted.x[i].head(7) - plant.x[i]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("initial coefficients of the reciprocal volume") {
  WoConfig cfg;
  cfg.order = 2;
  const auto m = build_model(cfg);
  Eigen::VectorXd x = x0_of(cfg);
  const auto X = initial_coefficients(m, x, 0.01);
  const int n = m.basis->size();
  CHECK(X[0] == Approx(10.0));
  CHECK(X[static_cast<Eigen::Index>(7) * n] ==
        Approx(oracle::gauss_expect([](double z) { return 1.0 / (2.0 + 0.02 * z); })).epsilon(1e-6));
  const auto Xc = initial_coefficients(m, x, 0.0);
  CHECK(Xc.segment(7 * n, n).tail(n - 1).norm() == 0.0);
}

TEST_CASE("objective moments match samples") {
  WoConfig cfg;
  cfg.order = 2;
  const auto m = build_model(cfg);
  const galerkin::ProjectionTensor t(m.basis, 2);
  const int n = m.basis->size();
  // Affine expansions: the degree-2 products are represented exactly.
  Eigen::VectorXd X = Eigen::VectorXd::Zero(8 * n);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  const double means[3] = {0.6, 1.0, 6.5};
  const int states[3] = {3, 4, 6};
  for (int s = 0; s < 3; ++s) {
    X[states[s] * n] = means[s];
    for (int j = 1; j <= kNxi; ++j) X[states[s] * n + j] = 0.02 * nd(rng);
  }
  const double x7_0 = 2.0;
  auto w0 = m;
  w0.cfg.variance_weight = 0.0;
  const double mean_part = objective(w0, t, X, x7_0, false).value;
  const double full = objective(m, t, X, x7_0, false).value;

  const polychaos::SampleMatrix S(200000, std::vector<polychaos::Family>(kNxi, polychaos::Family::Hermite), 9);
  const Eigen::MatrixXd psi = m.basis->eval_rows(S.values());
  const Eigen::VectorXd x4 = psi * X.segment(3 * n, n), x5 = psi * X.segment(4 * n, n),
                        x7 = psi * X.segment(6 * n, n);
  const Eigen::ArrayXd J = -0.5 * cfg.c_b_in * (x7.array() - x7_0) + x5.array() * x7.array() +
                           2.0 * x4.array() * x7.array();
  const double N = static_cast<double>(J.size());
  const double sd = std::sqrt((J - J.mean()).square().sum() / (N - 1));
  CHECK(std::abs(J.mean() - mean_part) < 4.0 * sd / std::sqrt(N));
  auto var = [&](const Eigen::ArrayXd& a) { return (a - a.mean()).square().sum() / (N - 1); };
  const double v = var(x5.array() * x7.array()) + var(x4.array() * x7.array());
  CHECK((mean_part - full) / cfg.variance_weight == Approx(v).epsilon(0.03));
}

TEST_CASE("objective gradient against finite differences") {
  WoConfig cfg;
  cfg.order = 1;
  const auto m = build_model(cfg);
  const galerkin::ProjectionTensor t(m.basis, 2);
  const int n = m.basis->size();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ud(-0.1, 0.1);
  Eigen::VectorXd X(8 * n);
  for (Eigen::Index i = 0; i < X.size(); ++i) X[i] = ud(rng);
  for (int l = 0; l < 8; ++l) X[l * n] += 1.0;
  const auto g = objective(m, t, X, 2.0, true).grad;
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    Eigen::VectorXd a = X, b = X;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    const double fd = (objective(m, t, a, 2.0, false).value - objective(m, t, b, 2.0, false).value) / 2e-6;
    CHECK(g[i] == Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("realized profit and terminal constraints") {
  WoConfig cfg;
  Eigen::VectorXd x(7);
  x << 0, 0, 0, 0.5, 1.0, 0.4, 6.0;
  CHECK(realized_profit(cfg, x, 2.0) == Approx(-10.0 + 6.0 + 6.0));
  cfg.order = 1;
  const auto m = build_model(cfg);
  const auto cs = terminal_constraints(m, 4000.0);
  CHECK(cs.size() == 2);
}

TEST_CASE("direct Monte Carlo reference") {
  WoConfig cfg;
  cfg.order = 1;
  const auto m = build_model(cfg);
  const auto grid = export_grid(4000.0, 5);
  CHECK(grid.size() == 5u);
  CHECK(grid.back() == 4000.0);
  const auto a = mc_reference(m, feed_then_hold(), grid, 40, 11);
  const auto b = mc_reference(m, feed_then_hold(), grid, 40, 11);
  CHECK(a.n_failed == 0);
  CHECK(a.n_draws == 40);
  CHECK(a.mean.rows() == 7);
  CHECK(a.mean.cols() == 5);
  CHECK((a.mean - b.mean).norm() == 0.0);
  CHECK(a.variance(5, 4) > 0.0);
  CHECK(a.mean(0, 0) == Approx(10.0).epsilon(0.01));
  CHECK(export_grid(4000.0).size() == 126u);
}

TEST_CASE("configuration round trips") {
  WoNmpcConfig c;
  c.model.order = 2;
  c.beta = 0.95;
  const auto back = WoNmpcConfig::from_json(c.to_json());
  CHECK(back.model.order == 2);
  CHECK(back.beta == 0.95);
  auto j = c.to_json();
  j["model"]["k_meen"] = 1;
  CHECK_THROWS_AS(WoNmpcConfig::from_json(j), ConfigError);
  j = c.to_json();
  j["betta"] = 1;
  CHECK_THROWS_AS(WoNmpcConfig::from_json(j), ConfigError);
  j = WoConfig{}.to_json();
  j["order"] = -1;
  CHECK_THROWS_AS(WoConfig::from_json(j), ConfigError);
}

TEST_CASE("plant parameter draws") {
  const WoConfig cfg;
  const auto a = draw_plant_parameters(cfg, 1, 0), b = draw_plant_parameters(cfg, 1, 0);
  const auto c = draw_plant_parameters(cfg, 1, 1);
  CHECK(a == b);
  CHECK(a != c);
  double s = 0.0;
  for (int r = 0; r < 2000; ++r) s += draw_plant_parameters(cfg, 3, r)[0];
  CHECK(s / 2000 == Approx(cfg.k_mean[0]).epsilon(0.01));
}
