#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "pcmpc/chance/beta.hpp"
#include "pcmpc/chance/constraint_set.hpp"
#include "pcmpc/chance/satisfaction.hpp"
#include "pcmpc/chance/tightening.hpp"
#include "pcmpc/common/error.hpp"

using namespace pcmpc;
using namespace pcmpc::chance;
using polychaos::Family;
using doctest::Approx;

namespace {

polychaos::BasisPtr hermite(int n, int P) {
  return std::make_shared<polychaos::OrthoBasis>(polychaos::OrthoBasis::uniform_family(Family::Hermite, n, P));
}

// One state per random variable: x_d = xi_d.
std::vector<Eigen::VectorXd> identity_states(const polychaos::BasisPtr& b) {
  const int n = b->size();
  Eigen::VectorXd X = Eigen::VectorXd::Zero(b->n_xi() * n);
  for (int d = 0; d < b->n_xi(); ++d) X[d * n + 1 + d] = 1.0;
  return {X};
}

}  // namespace

TEST_CASE("indicator examples") {
  const auto b = hermite(1, 1);
  ConstraintSet one(b, 1);
  one.add(ConstraintFunction::affine(one.add_time(0.0), 0, 1.0, -1.0));
  const auto X = identity_states(b);
  CHECK(indicator(one, X, Eigen::VectorXd::Zero(1)));

  ConstraintSet joint(b, 1);
  const int t = joint.add_time(0.0);
  joint.add(ConstraintFunction::affine(t, 0, 1.0, 0.0));
  joint.add(ConstraintFunction::affine(t, 0, -1.0, -5.0));
  CHECK_FALSE(indicator(joint, X, Eigen::VectorXd::Constant(1, 0.5)));

  ConstraintSet never(b, 1);
  never.add(ConstraintFunction{never.add_time(0.0), -1.0, {}});
  const polychaos::SampleMatrix s(100, {Family::Hermite}, 3);
  CHECK(estimate_probability(never, X, s).p_hat == 1.0);
}

TEST_CASE("sample-average probabilities") {
  const auto b1 = hermite(1, 1);
  ConstraintSet half(b1, 1);
  half.add(ConstraintFunction::affine(half.add_time(0.0), 0, 1.0, 0.0));
  const polychaos::SampleMatrix s1(1000000, {Family::Hermite}, 21);
  CHECK(std::abs(estimate_probability(half, identity_states(b1), s1).p_hat - 0.5) < 0.002);

  const auto b2 = hermite(2, 1);
  ConstraintSet box(b2, 2);
  const int t = box.add_time(0.0);
  box.add(ConstraintFunction::affine(t, 0, 1.0, -1.0));
  box.add(ConstraintFunction::affine(t, 1, 1.0, -1.0));
  const polychaos::SampleMatrix s2(1000000, {Family::Hermite, Family::Hermite}, 22);
  const double want = oracle::Phi(1.0) * oracle::Phi(1.0);
  CHECK(std::abs(estimate_probability(box, identity_states(b2), s2).p_hat - want) < 0.002);
}

TEST_CASE("nonlinear constraint functions and gradients") {
  ConstraintFunction g{0, 0.5, {{2.0, {{0, 2}, {1, 1}}}, {-1.0, {{1, 1}}}}};
  const Eigen::Vector2d x(1.5, -0.7);
  CHECK(g.eval(x) == Approx(0.5 + 2.0 * 2.25 * -0.7 + 0.7));
  const auto gr = g.gradient(x);
  CHECK(gr[0] == Approx(2.0 * 2 * 1.5 * -0.7));
  CHECK(gr[1] == Approx(2.0 * 2.25 - 1.0));
  CHECK(g.degree() == 3);
}

TEST_CASE("beta quantile: closed form and symmetric case") {
  CHECK(std::abs(beta_inv_cdf(0.975, 1, 100) - (1 - std::pow(0.025, 0.01))) < 1e-10);
  CHECK(std::abs(beta_inv_cdf(0.975, 1, 100) - 0.0362167) < 1e-6);
  CHECK(std::abs(beta_inv_cdf(0.5, 2, 2) - 0.5) < 1e-12);
}

TEST_CASE("beta quantile round trip") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> P(1e-6, 1 - 1e-6), A(0.1, 600.0);
  for (int i = 0; i < 300; ++i) {
    const double p = P(rng), a = A(rng), b = A(rng);
    CHECK(std::abs(betainc(beta_inv_cdf(p, a, b), a, b) - p) < 1e-10);
  }
}

TEST_CASE("incomplete beta against the binomial tail") {
  for (int n : {10, 57, 400})
    for (double x : {0.02, 0.3, 0.77})
      for (int a : {1, n / 3, n - 1}) {
        const double ref = static_cast<double>(oracle::binom_upper(n, x, a));
        CHECK(betainc(x, a, n - a + 1) == Approx(ref).epsilon(1e-11).scale(1.0));
      }
}

TEST_CASE("tightening at the case-study settings") {
  const auto r = tighten(0.98, 0.01, 5000);
  CHECK(r.k == oracle::minimal_k(5000, 0.01, 0.98));
  CHECK(r.beta_cor == Approx(static_cast<double>(r.k) / 5000));
  CHECK(std::abs(r.beta_cor - 0.985) < 5e-4);
  CHECK(r.lower_bound_at_beta_cor >= 0.98);
  CHECK(lower_confidence_bound(r.k - 1, 5000, 0.01) < 0.98);
}

TEST_CASE("tightening by exhaustive scan") {
  const auto r = tighten(0.9, 0.05, 100);
  CHECK(r.k == oracle::minimal_k(100, 0.05, 0.9));
  CHECK(r.beta_cor >= 0.9);
  for (int N : {50, 137, 1000}) {
    const auto q = tighten(0.8, 0.1, N);
    CHECK(q.k == oracle::minimal_k(N, 0.1, 0.8));
  }
  CHECK_THROWS_AS(tighten(0.5, 0.5, 1), InfeasibleError);
}

TEST_CASE("tightening curve") {
  const auto c = tightening_curve(0.95, 0.01, 200, 300);
  REQUIRE(c.size() == 101u);
  int drops = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].beta_cor >= 0.95);
    CHECK(c[i].n_samples == 200 + static_cast<int>(i));
    if (i > 0 && c[i].beta_cor < c[i - 1].beta_cor) ++drops;
  }
  CHECK(drops >= 1);
}

TEST_CASE("feasibility report") {
  const auto b = hermite(1, 1);
  ConstraintSet cs(b, 1);
  cs.add(ConstraintFunction::affine(cs.add_time(0.0), 0, 1.0, -3.0));
  const polychaos::SampleMatrix s(5000, {Family::Hermite}, 8);
  const auto tight = tighten(0.98, 0.01, 5000);
  const auto ok = feasibility_report(cs, identity_states(b), tight, s, 77, 10);
  CHECK(ok.sampled_feasible);
  CHECK(ok.confidence == Approx(0.99));
  CHECK(ok.message.find("feasible with confidence") == 0);
  CHECK(ok.fresh_p_hat.size() == 10u);
  CHECK(ok.fresh_fraction_at_beta >= 0.9);

  ConstraintSet tight_cs(b, 1);
  tight_cs.add(ConstraintFunction::affine(tight_cs.add_time(0.0), 0, 1.0, -1.0));
  const auto bad = feasibility_report(tight_cs, identity_states(b), tight, s, 77, 2);
  CHECK_FALSE(bad.sampled_feasible);
  CHECK(bad.message.find("tightened constraint violated") == 0);
}
