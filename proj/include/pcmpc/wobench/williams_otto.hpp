#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "pcmpc/chance/constraint_set.hpp"
#include "pcmpc/galerkin/expanded_ode.hpp"
#include "pcmpc/odeint/dopri5.hpp"

namespace pcmpc::wobench {

/// Random variable layout: xi = [k1, k2, k3, x1(t_k), ..., x7(t_k)].
constexpr int kParams = 3;
constexpr int kPhysStates = 7;
constexpr int kStates = 8;  // lifted: x8 = 1 / x7
constexpr int kNxi = kParams + kPhysStates;
constexpr int kVolumeVar = kParams + 6;  // xi index of x7(t_k)

struct WoConfig {
  int order = 3;
  double c_b_in = 5.0;
  std::array<double, 3> k_mean{1.6599e6, 7.2117e8, 2.6745e12};
  /// Second argument of the printed normal laws, read as variances.
  std::array<double, 3> k_variance{1.6599e5, 7.2117e7, 2.6745e11};
  /// When > 0, overrides the variances: sd = k_rel_sd * mean.
  double k_rel_sd = 0.0;
  std::array<double, 3> activation{6666.7, 8333.3, 11111.0};
  std::array<double, 7> x0{10, 0, 0, 0, 0, 0, 2};
  double ic_rel_sd = 0.01;      // measurement/observer noise, relative to the value
  bool ic_noise_at_t0 = true;   // initial batch state uncertain as well
  double g_limit = 0.6;         // x6(tf) <= g_limit
  double volume_limit = 7.0;    // x7(tf) <= volume_limit
  double variance_weight = 10.0;

  std::array<double, 3> k_sd() const;
  nlohmann::json to_json() const;
  static WoConfig from_json(const nlohmann::json& j);
};

/// Lifted polynomial model plus its basis.
struct WoModel {
  WoConfig cfg;
  polychaos::BasisPtr basis;
  std::shared_ptr<galerkin::PolynomialOde> lifted;
};

WoModel build_model(const WoConfig& cfg);

/// Original seven-state plant with fixed rate constants.
odeint::RhsFn plant_rhs(const std::array<double, 3>& k, const WoConfig& cfg);

/// Eight-state lifted state from a seven-state one.
Eigen::VectorXd lift(const Eigen::Ref<const Eigen::VectorXd>& x7);

/// Initial coefficient vector at a measured state: Gaussian expansions with
/// sd = rel_sd * |x| per state, x8 fitted by collocation.
Eigen::VectorXd initial_coefficients(const WoModel& m, const Eigen::Ref<const Eigen::VectorXd>& x,
                                     double rel_sd);

/// Profit J and dJ/dX(tf) (X is the stacked coefficient vector at tf).
struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd grad;
};
ObjectiveValue objective(const WoModel& m, const galerkin::ProjectionTensor& tensor,
                         const Eigen::Ref<const Eigen::VectorXd>& X_tf, double x7_t0_mean,
                         bool gradient);

/// Profit of one realized trajectory.
double realized_profit(const WoConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& x_tf,
                       double x7_t0);

/// {x6(tf) - 0.6 <= 0, x7(tf) - 7 <= 0} over the lifted states.
chance::ConstraintSet terminal_constraints(const WoModel& m, double t_f);

}  // namespace pcmpc::wobench
