#include "pcmpc/wobench/williams_otto.hpp"

#include <cmath>

#include "pcmpc/common/error.hpp"

namespace pcmpc::wobench {

using galerkin::InputFunction;
using polychaos::Family;
using polychaos::VariableMap;

std::array<double, 3> WoConfig::k_sd() const {
  std::array<double, 3> sd{};
  for (int i = 0; i < 3; ++i) sd[i] = k_rel_sd > 0.0 ? k_rel_sd * k_mean[i] : std::sqrt(k_variance[i]);
  return sd;
}

nlohmann::json WoConfig::to_json() const {
  return {{"order", order},
          {"c_b_in", c_b_in},
          {"k_mean", k_mean},
          {"k_variance", k_variance},
          {"k_rel_sd", k_rel_sd},
          {"activation", activation},
          {"x0", x0},
          {"ic_rel_sd", ic_rel_sd},
          {"ic_noise_at_t0", ic_noise_at_t0},
          {"g_limit", g_limit},
          {"volume_limit", volume_limit},
          {"variance_weight", variance_weight}};
}

WoConfig WoConfig::from_json(const nlohmann::json& j) {
  WoConfig c;
  try {
    c.order = j.value("order", c.order);
    c.c_b_in = j.value("c_b_in", c.c_b_in);
    c.k_mean = j.value("k_mean", c.k_mean);
    c.k_variance = j.value("k_variance", c.k_variance);
    c.k_rel_sd = j.value("k_rel_sd", c.k_rel_sd);
    c.activation = j.value("activation", c.activation);
    c.x0 = j.value("x0", c.x0);
    c.ic_rel_sd = j.value("ic_rel_sd", c.ic_rel_sd);
    c.ic_noise_at_t0 = j.value("ic_noise_at_t0", c.ic_noise_at_t0);
    c.g_limit = j.value("g_limit", c.g_limit);
    c.volume_limit = j.value("volume_limit", c.volume_limit);
    c.variance_weight = j.value("variance_weight", c.variance_weight);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("Williams-Otto config: ") + e.what());
  }
  if (c.order < 0) throw ConfigError("Williams-Otto config: order must be >= 0");
  if (c.ic_rel_sd < 0.0) throw ConfigError("Williams-Otto config: ic_rel_sd must be >= 0");
  return c;
}

WoModel build_model(const WoConfig& cfg) {
  WoModel m;
  m.cfg = cfg;
  const auto sd = cfg.k_sd();
  std::vector<VariableMap> vars;
  for (int i = 0; i < kParams; ++i) vars.push_back({Family::Hermite, cfg.k_mean[i], sd[i]});
  for (int l = 0; l < kPhysStates; ++l) vars.push_back({Family::Hermite, 0.0, 1.0});
  m.basis = std::make_shared<polychaos::OrthoBasis>(polychaos::MultiIndexSet(kNxi, cfg.order), vars);

  auto ode = std::make_shared<galerkin::PolynomialOde>(kStates, 2);
  const int u1 = ode->add_input_function(InputFunction::power(0, 1.0));
  int s[3];
  int k[3];
  for (int i = 0; i < 3; ++i) {
    s[i] = ode->add_input_function(InputFunction::arrhenius(1, cfg.activation[i]));
    k[i] = ode->add_parameter(
        polychaos::PCExpansion::affine(m.basis, cfg.k_mean[i], i, cfg.order > 0 ? sd[i] : 0.0));
  }
  auto ex = [](std::initializer_list<int> states) {
    std::vector<int> e(kStates, 0);
    for (int l : states) ++e[l];
    return e;
  };
  // States 0..7 = x1..x8. Rates rho_i = k_i sigma_i(u2) * (reactants).
  const auto r1 = ex({0, 1}), r2 = ex({1, 2}), r3 = ex({2, 3});
  auto rate = [&](int eq, double sign, int i, const std::vector<int>& e) {
    ode->add_term(eq, sign, e, s[i], k[i]);
  };
  rate(0, -1, 0, r1);
  rate(1, -1, 0, r1);
  rate(1, -1, 1, r2);
  rate(2, +1, 0, r1);
  rate(2, -1, 1, r2);
  rate(2, -1, 2, r3);
  rate(3, +1, 1, r2);
  rate(3, -1, 2, r3);
  rate(4, +1, 1, r2);
  rate(5, +1, 2, r3);
  // Dilution -x_i u1 / x7 = -u1 x_i x8, feed c_B,in u1 x8.
  for (int i = 0; i < 6; ++i) ode->add_term(i, -1.0, ex({i, 7}), u1);
  ode->add_term(1, cfg.c_b_in, ex({7}), u1);
  ode->add_term(6, 1.0, ex({}), u1);
  ode->add_term(7, -1.0, ex({7, 7}), u1);
  m.lifted = std::move(ode);
  return m;
}

odeint::RhsFn plant_rhs(const std::array<double, 3>& k, const WoConfig& cfg) {
  const double cb = cfg.c_b_in;
  const auto E = cfg.activation;
  return [k, cb, E](const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& u,
                    Eigen::Ref<Eigen::VectorXd> dx) {
    const double r1 = k[0] * x[0] * x[1] * std::exp(-E[0] / u[1]);
    const double r2 = k[1] * x[1] * x[2] * std::exp(-E[1] / u[1]);
    const double r3 = k[2] * x[2] * x[3] * std::exp(-E[2] / u[1]);
    const double D = u[0] / x[6];
    dx[0] = -r1 - x[0] * D;
    dx[1] = -r1 - r2 + cb * D - x[1] * D;
    dx[2] = r1 - r2 - r3 - x[2] * D;
    dx[3] = r2 - r3 - x[3] * D;
    dx[4] = r2 - x[4] * D;
    dx[5] = r3 - x[5] * D;
    dx[6] = u[0];
  };
}

Eigen::VectorXd lift(const Eigen::Ref<const Eigen::VectorXd>& x7) {
  Eigen::VectorXd x(kStates);
  x.head(kPhysStates) = x7.head(kPhysStates);
  x[7] = 1.0 / x7[6];
  return x;
}

Eigen::VectorXd initial_coefficients(const WoModel& m, const Eigen::Ref<const Eigen::VectorXd>& x,
                                     double rel_sd) {
  std::vector<galerkin::InitialValue> v;
  const bool random = rel_sd > 0.0 && m.cfg.order > 0;
  for (int l = 0; l < kPhysStates; ++l) {
    const double sd = rel_sd * std::abs(x[l]);
    if (random && sd > 0.0)
      v.emplace_back(polychaos::PCExpansion::affine(m.basis, x[l], kParams + l, sd));
    else
      v.emplace_back(x[l]);
  }
  const double sd7 = rel_sd * std::abs(x[6]);
  if (random && sd7 > 0.0) {
    const double mean7 = x[6];
    v.emplace_back(galerkin::NonlinearInitial{
        [mean7, sd7](const Eigen::VectorXd& xi) { return 1.0 / (mean7 + sd7 * xi[kVolumeVar]); }});
  } else {
    v.emplace_back(1.0 / x[6]);
  }
  return galerkin::project_initial_conditions(v, m.basis, true);
}

ObjectiveValue objective(const WoModel& m, const galerkin::ProjectionTensor& tensor,
                         const Eigen::Ref<const Eigen::VectorXd>& X_tf, double x7_t0_mean,
                         bool gradient) {
  const int n = m.basis->size();
  if (X_tf.size() != static_cast<Eigen::Index>(kStates) * n) throw DimensionError("objective: size mismatch");
  auto seg = [&](int l) { return X_tf.segment(static_cast<Eigen::Index>(l) * n, n); };
  const auto& norms = m.basis->norms();
  const double w = m.cfg.variance_weight;
  const auto p5 = galerkin::multiply(tensor, seg(4), seg(6), gradient);
  const auto p4 = galerkin::multiply(tensor, seg(3), seg(6), gradient);
  auto var = [&](const Eigen::VectorXd& z) {
    return (z.tail(n - 1).array().square() * norms.tail(n - 1).array()).sum();
  };
  ObjectiveValue out;
  out.value = -0.5 * m.cfg.c_b_in * (seg(6)[0] - x7_t0_mean) + p5.z[0] + 2.0 * p4.z[0] -
              w * (var(p5.z) + var(p4.z));
  if (gradient) {
    out.grad = Eigen::VectorXd::Zero(X_tf.size());
    auto dz = [&](const Eigen::VectorXd& z, double mean_weight) {
      Eigen::VectorXd g = -2.0 * w * z.cwiseProduct(norms);
      g[0] = mean_weight;
      return g;
    };
    const Eigen::VectorXd g5 = dz(p5.z, 1.0), g4 = dz(p4.z, 2.0);
    out.grad.segment(4 * n, n) += p5.dz_da.transpose() * g5;
    out.grad.segment(6 * n, n) += p5.dz_db.transpose() * g5;
    out.grad.segment(3 * n, n) += p4.dz_da.transpose() * g4;
    out.grad.segment(6 * n, n) += p4.dz_db.transpose() * g4;
    out.grad[6 * n] += -0.5 * m.cfg.c_b_in;
  }
  return out;
}

double realized_profit(const WoConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& x_tf, double x7_t0) {
  return -0.5 * cfg.c_b_in * (x_tf[6] - x7_t0) + x_tf[4] * x_tf[6] + 2.0 * x_tf[3] * x_tf[6];
}

chance::ConstraintSet terminal_constraints(const WoModel& m, double t_f) {
  chance::ConstraintSet cs(m.basis, kStates);
  const int t = cs.add_time(t_f);
  cs.add(chance::ConstraintFunction::affine(t, 5, 1.0, -m.cfg.g_limit));
  cs.add(chance::ConstraintFunction::affine(t, 6, 1.0, -m.cfg.volume_limit));
  return cs;
}

}  // namespace pcmpc::wobench
