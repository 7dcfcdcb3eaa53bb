#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

#include "pcmpc/nlp/qp.hpp"
#include "pcmpc/nlp/sqp.hpp"

using namespace pcmpc::nlp;
using doctest::Approx;

namespace {

// Projected gradient on a box, fixed step 1/L.
Eigen::VectorXd projected_gradient(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi) {
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(g.size()).cwiseMax(lo).cwiseMin(hi);
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd y = (x - (H * x + g) / L).cwiseMax(lo).cwiseMin(hi);
    const double d = (y - x).norm();
    x = y;
    if (d < 1e-14) break;
  }
  return x;
}

NlpProblem scalar_problem() {
  NlpProblem p;
  p.n = 1;
  p.m = 1;
  p.evaluate = [](const Eigen::VectorXd& x, bool d, Evaluation& e) {
    e.f = (x[0] - 2) * (x[0] - 2);
    e.c = Eigen::VectorXd::Constant(1, x[0] - 1);
    if (d) {
      e.grad = Eigen::VectorXd::Constant(1, 2 * (x[0] - 2));
      e.jac = Eigen::MatrixXd::Ones(1, 1);
    }
  };
  return p;
}

}  // namespace

TEST_CASE("unconstrained Newton step") {
  const auto r = solve_qp(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(-1, 0), Eigen::MatrixXd(0, 2),
                          Eigen::VectorXd(0));
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK((r.x - Eigen::Vector2d(1, 0)).norm() < 1e-14);
}

TEST_CASE("clipped Newton step") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 0;
  const auto r = solve_qp(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(-2, 0), A, Eigen::VectorXd::Constant(1, 0.5));
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK((r.x - Eigen::Vector2d(0.5, 0)).norm() < 1e-14);
  CHECK(r.lambda[0] == Approx(1.5));
}

TEST_CASE("random box QPs against projected gradient") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd M(5, 5);
    for (int i = 0; i < 25; ++i) M.data()[i] = N(rng);
    const Eigen::MatrixXd H = M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(5, 5);
    Eigen::VectorXd g(5), lo(5), hi(5);
    for (int i = 0; i < 5; ++i) {
      g[i] = 3 * N(rng);
      lo[i] = -std::abs(N(rng));
      hi[i] = std::abs(N(rng));
    }
    const auto r = solve_qp(H, g, Eigen::MatrixXd(0, 5), Eigen::VectorXd(0), lo, hi);
    REQUIRE(r.status == QpStatus::Optimal);
    CHECK((r.x - projected_gradient(H, g, lo, hi)).norm() < 1e-8);
  }
}

TEST_CASE("general rows and infeasibility") {
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  const auto bad = solve_qp(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), A, Eigen::Vector2d(-1, -1));
  CHECK(bad.status == QpStatus::Infeasible);
  Eigen::MatrixXd B(1, 2);
  B << 1, 1;
  const auto r = solve_qp(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(-1, -1), B, Eigen::VectorXd::Constant(1, 1));
  CHECK((r.x - Eigen::Vector2d(0.5, 0.5)).norm() < 1e-14);
}

TEST_CASE("SQP: active bound-type constraint") {
  const auto r = solve(scalar_problem(), Eigen::VectorXd::Constant(1, -3.0));
  CHECK(r.converged());
  CHECK(r.x[0] == Approx(1.0).epsilon(1e-8));
  CHECK(r.lambda[0] == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("SQP: Rosenbrock") {
  NlpProblem p;
  p.n = 2;
  p.evaluate = [](const Eigen::VectorXd& x, bool d, Evaluation& e) {
    e.f = 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
    e.c.resize(0);
    if (d) {
      e.grad = Eigen::Vector2d(-400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]), 200 * (x[1] - x[0] * x[0]));
      e.jac.resize(0, 2);
    }
  };
  SqpOptions o;
  o.kkt_tol = 1e-10;
  const auto r = solve(p, Eigen::Vector2d(-1.2, 1.0), o);
  CHECK(r.converged());
  CHECK((r.x - Eigen::Vector2d(1, 1)).norm() < 1e-6);
}

TEST_CASE("SQP: linear objective on a disc") {
  NlpProblem p;
  p.n = 2;
  p.m = 1;
  p.evaluate = [](const Eigen::VectorXd& x, bool d, Evaluation& e) {
    e.f = x.sum();
    e.c = Eigen::VectorXd::Constant(1, x.squaredNorm() - 2);
    if (d) {
      e.grad = Eigen::Vector2d(1, 1);
      e.jac = 2 * x.transpose();
    }
  };
  SqpOptions o;
  o.check_gradients = true;
  const auto r = solve(p, Eigen::Vector2d(0.3, -0.1), o);
  CHECK(r.converged());
  CHECK((r.x - Eigen::Vector2d(-1, -1)).norm() < 1e-6);
  CHECK(r.lambda[0] == Approx(0.5).epsilon(1e-6));
  CHECK(r.gradient_check.max_abs_error < 1e-6);
}

TEST_CASE("SQP: simple bounds are respected") {
  NlpProblem p;
  p.n = 2;
  p.lower = Eigen::Vector2d(0, 0);
  p.upper = Eigen::Vector2d(1, 1);
  p.evaluate = [](const Eigen::VectorXd& x, bool d, Evaluation& e) {
    e.f = -x[0] + std::pow(x[1] - 0.3, 2);
    e.c.resize(0);
    if (d) {
      e.grad = Eigen::Vector2d(-1, 2 * (x[1] - 0.3));
      e.jac.resize(0, 2);
    }
  };
  const auto r = solve(p, Eigen::Vector2d(0.5, 0.9));
  CHECK(r.converged());
  CHECK(r.x[0] == Approx(1.0));
  CHECK(r.x[1] == Approx(0.3));
}

TEST_CASE("SQP: infeasible constraints end in the elastic mode") {
  NlpProblem p;
  p.n = 1;
  p.m = 2;
  p.evaluate = [](const Eigen::VectorXd& x, bool d, Evaluation& e) {
    e.f = x[0] * x[0];
    e.c = Eigen::Vector2d(x[0] + 1, 1 - x[0]);
    if (d) {
      e.grad = Eigen::VectorXd::Constant(1, 2 * x[0]);
      e.jac = Eigen::Vector2d(1, -1);
    }
  };
  const auto r = solve(p, Eigen::VectorXd::Constant(1, 3.0));
  CHECK_FALSE(r.converged());
  CHECK(r.violation > 0.5);
}

TEST_CASE("gradient check flags a wrong derivative") {
  NlpProblem p = scalar_problem();
  const auto good = check_gradients(p, Eigen::VectorXd::Constant(1, 0.3));
  CHECK(good.max_abs_error < 1e-7);
  auto inner = p.evaluate;
  p.evaluate = [inner](const Eigen::VectorXd& x, bool d, Evaluation& e) {
    inner(x, d, e);
    if (d) e.grad[0] += 0.1;
  };
  CHECK(check_gradients(p, Eigen::VectorXd::Constant(1, 0.3)).max_abs_error > 0.05);
}

TEST_CASE("iteration log") {
  SqpOptions o;
  o.log_path = "sqp_test_log.csv";
  solve(scalar_problem(), Eigen::VectorXd::Constant(1, 0.0), o);
  std::ifstream is(o.log_path);
  std::string header;
  std::getline(is, header);
  CHECK(header.find("iter") == 0);
}
