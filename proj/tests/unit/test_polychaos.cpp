#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pcmpc/common/error.hpp"
#include "pcmpc/polychaos/basis.hpp"
#include "pcmpc/polychaos/expansion.hpp"
#include "pcmpc/polychaos/multi_index.hpp"
#include "pcmpc/polychaos/samples.hpp"
#include "pcmpc/polychaos/serialization.hpp"

using namespace pcmpc::polychaos;
using doctest::Approx;

namespace {
BasisPtr hermite(int n, int P) { return std::make_shared<OrthoBasis>(OrthoBasis::uniform_family(Family::Hermite, n, P)); }
}  // namespace

TEST_CASE("index set sizes") {
  CHECK(MultiIndexSet(10, 3).size() == 286);
  CHECK(MultiIndexSet(5, 0).size() == 1);
  const MultiIndexSet s(2, 2);
  REQUIRE(s.size() == 6);
  const int want[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (int k = 0; k < 6; ++k) {
    CHECK(s[k][0] == want[k][0]);
    CHECK(s[k][1] == want[k][1]);
    CHECK(s.find(s[k]) == k);
  }
  for (int k = 1; k < 286; ++k) CHECK(MultiIndexSet(10, 3).total_degree(k) >= MultiIndexSet(10, 3).total_degree(k - 1));
}

TEST_CASE("basis evaluation") {
  const auto h = hermite(1, 2);
  const auto v = h->eval(Eigen::VectorXd::Zero(1));
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == -1.0);
  const auto l = OrthoBasis::uniform_family(Family::Legendre, 1, 1).eval(Eigen::VectorXd::Ones(1));
  CHECK(l[0] == 1.0);
  CHECK(l[1] == 1.0);
  const auto h2 = hermite(2, 2);
  const int k11 = h2->indices().find(std::vector<int>{1, 1});
  CHECK(h2->eval(Eigen::Vector2d(1, 1))[k11] == 1.0);
}

TEST_CASE("norms agree with quadrature") {
  const auto h = hermite(1, 4);
  for (int k = 0; k <= 4; ++k) {
    const double q = oracle::gauss_expect([&](double x) {
      const double p = h->eval(Eigen::VectorXd::Constant(1, x))[k];
      return p * p;
    });
    CHECK(h->norms()[k] == Approx(q).epsilon(1e-10));
  }
  const auto g = gauss_rule(Family::Hermite, 5);
  CHECK(g.weights.sum() == Approx(1.0).epsilon(1e-14));
  CHECK((g.weights.array() * g.nodes.array().pow(8)).sum() == Approx(105.0).epsilon(1e-12));
  const auto lg = gauss_rule(Family::Legendre, 4);
  CHECK(lg.weights.sum() == Approx(1.0).epsilon(1e-14));
  CHECK((lg.weights.array() * lg.nodes.array().pow(6)).sum() == Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("sample evaluation and moments") {
  const auto h = hermite(1, 2);
  const auto c = PCExpansion::constant(h, 4.5);
  CHECK(c(Eigen::VectorXd::Constant(1, 1.7)) == 4.5);
  const PCExpansion id(hermite(1, 1), Eigen::Vector2d(0, 1));
  const auto xs = SampleMatrix::from_values(Eigen::Vector3d(-1, 0, 2), {Family::Hermite});
  const auto v = sample_evaluate(id, xs);
  CHECK(v[0] == -1.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 2.0);
  const PCExpansion sq(h, Eigen::Vector3d(1, 0, 1));
  CHECK(sq(Eigen::VectorXd::Constant(1, 3.0)) == Approx(9.0));
  CHECK(mean(PCExpansion(hermite(1, 1), Eigen::Vector2d(3, 0.5))) == 3.0);
  CHECK(variance(PCExpansion(hermite(1, 1), Eigen::Vector2d(1, 2))) == Approx(4.0));
  CHECK(variance(PCExpansion(h, Eigen::Vector3d(0, 0, 1))) == Approx(2.0));
}

TEST_CASE("collocation fits") {
  const auto h = hermite(1, 2);
  const Eigen::Vector3d xi(-1.0, 0.5, 2.0);
  const Eigen::Vector3d y = xi.array().square();
  const auto f = fit_collocation(xi, y, h);
  CHECK(f.coeffs()[0] == Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(f.coeffs()[1]) < 1e-10);
  CHECK(f.coeffs()[2] == Approx(1.0).epsilon(1e-10));
  const auto c7 = fit_collocation(xi, Eigen::Vector3d::Constant(7.0), h);
  CHECK(c7.coeffs()[0] == Approx(7.0).epsilon(1e-12));
  CHECK(c7.coeffs().tail(2).norm() < 1e-10);
}

TEST_CASE("collocation of the reciprocal volume") {
  const auto h = hermite(1, 3);
  const auto fit = fit_function([](const Eigen::VectorXd& x) { return 1.0 / (2.0 + 0.02 * x[0]); }, h, 200, 11);
  const double exact = oracle::gauss_expect([](double x) { return 1.0 / (2.0 + 0.02 * x); });
  CHECK(std::abs(mean(fit) - exact) < 1e-5);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n;
  double s = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) s += 1.0 / (2.0 + 0.02 * n(rng));
  CHECK(std::abs(mean(fit) - s / draws) < 1e-5);
}

TEST_CASE("affine expansion and order-0 guard") {
  const auto h = hermite(3, 2);
  const auto a = PCExpansion::affine(h, 5.0, 1, 0.3);
  CHECK(a(Eigen::Vector3d(0.4, -2.0, 1.0)) == Approx(5.0 - 0.6));
  CHECK_THROWS_AS(PCExpansion::affine(hermite(3, 0), 1.0, 0, 0.1), pcmpc::DimensionError);
  CHECK(PCExpansion::affine(hermite(3, 0), 1.0, 0, 0.0).coeffs()[0] == 1.0);
}

TEST_CASE("sample rows are stream-partitionable") {
  const std::vector<Family> fam{Family::Hermite, Family::Legendre};
  const SampleMatrix s(20, fam, 1234);
  Eigen::MatrixXd part(5, 2);
  SampleMatrix::generate_rows(fam, 1234, 7, 12, part);
  CHECK((part - s.values().middleRows(7, 5)).norm() == 0.0);
  CHECK((s.values().col(1).array().abs() <= 1.0).all());
  const SampleMatrix again(20, fam, 1234);
  CHECK((again.values() - s.values()).norm() == 0.0);
}

TEST_CASE("sample moments of a known set") {
  const auto m = sample_moments(Eigen::Vector4d(1, 2, 3, 4));
  CHECK(m.mean == Approx(2.5));
  CHECK(m.variance == Approx(5.0 / 3.0));
  CHECK(std::abs(m.skewness) < 1e-12);
  CHECK(m.kurtosis == Approx(1.64));
}

TEST_CASE("serialization round trip") {
  const std::vector<VariableMap> vars{{Family::Hermite, 2.0, 0.5}, {Family::Legendre, 0.0, 1.0}};
  const auto b = std::make_shared<OrthoBasis>(MultiIndexSet(2, 3), vars);
  const auto b2 = basis_from_json(basis_to_json(*b));
  CHECK(b2->same_as(*b));
  const PCExpansion e(b, Eigen::VectorXd::LinSpaced(b->size(), 0.1, 1.0));
  const auto e2 = expansion_from_json(expansion_to_json(e));
  CHECK((e2.coeffs() - e.coeffs()).norm() == 0.0);
}
