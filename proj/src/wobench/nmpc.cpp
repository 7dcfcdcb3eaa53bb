#include "pcmpc/wobench/nmpc.hpp"

#include <random>

#include "pcmpc/common/error.hpp"
#include "pcmpc/polychaos/samples.hpp"

namespace pcmpc::wobench {

nlohmann::json WoNmpcConfig::to_json() const {
  return {{"model", model.to_json()},     {"nominal", nominal},
          {"beta", beta},                 {"alpha", alpha},
          {"n_samples", n_samples},       {"sample_seed", sample_seed},
          {"u1_max", u1_max},             {"u2_min", u2_min},
          {"u2_max", u2_max},             {"u2_rate", u2_rate},
          {"initial_input", initial_input}, {"rel_tol", rel_tol},
          {"abs_tol", abs_tol},           {"sqp_max_iter", sqp_max_iter},
          {"kkt_tol", kkt_tol},           {"n_fresh", n_fresh}};
}

WoNmpcConfig WoNmpcConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("ocp config must be an object");
  const nlohmann::json known = WoNmpcConfig{}.to_json();
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ConfigError("ocp config: unknown key '" + key + "'");
  WoNmpcConfig c;
  try {
    if (j.contains("model")) {
      const nlohmann::json km = WoConfig{}.to_json();
      for (const auto& [key, _] : j["model"].items())
        if (!km.contains(key)) throw ConfigError("model config: unknown key '" + key + "'");
      c.model = WoConfig::from_json(j["model"]);
    }
    c.nominal = j.value("nominal", c.nominal);
    c.beta = j.value("beta", c.beta);
    c.alpha = j.value("alpha", c.alpha);
    c.n_samples = j.value("n_samples", c.n_samples);
    c.sample_seed = j.value("sample_seed", c.sample_seed);
    c.u1_max = j.value("u1_max", c.u1_max);
    c.u2_min = j.value("u2_min", c.u2_min);
    c.u2_max = j.value("u2_max", c.u2_max);
    c.u2_rate = j.value("u2_rate", c.u2_rate);
    c.initial_input = j.value("initial_input", c.initial_input);
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.abs_tol = j.value("abs_tol", c.abs_tol);
    c.sqp_max_iter = j.value("sqp_max_iter", c.sqp_max_iter);
    c.kkt_tol = j.value("kkt_tol", c.kkt_tol);
    c.n_fresh = j.value("n_fresh", c.n_fresh);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ocp config: ") + e.what());
  }
  if (!(c.beta > 0.0 && c.beta < 1.0) || !(c.alpha > 0.0 && c.alpha < 1.0))
    throw ConfigError("ocp config: beta and alpha must lie in (0, 1)");
  if (c.n_samples < 1) throw ConfigError("ocp config: n_samples must be >= 1");
  return c;
}

snmpc::ClosedLoopConfig default_closed_loop() {
  snmpc::ClosedLoopConfig c;
  for (int k = 0; k < 16; ++k) c.sampling_times.push_back(250.0 * k);
  c.t_f = 4000.0;
  c.runs = 50;
  c.noise_rel_sd = 0.01;
  return c;
}

WoNmpc::WoNmpc(WoNmpcConfig cfg) : cfg_(std::move(cfg)) {
  WoConfig mc = cfg_.model;
  if (cfg_.nominal) mc.order = 0;
  model_ = build_model(mc);
  tensor_ = std::make_shared<galerkin::ProjectionTensor>(model_.basis, model_.lifted->max_state_degree());
  ode_ = std::make_shared<galerkin::ExpandedOde>(galerkin::project_dynamics(*model_.lifted, model_.basis, *tensor_));
  if (!cfg_.nominal) {
    tight_ = chance::tighten(cfg_.beta, cfg_.alpha, cfg_.n_samples);
    samples_ = std::make_shared<polychaos::SampleMatrix>(
        cfg_.n_samples, std::vector<polychaos::Family>(kNxi, polychaos::Family::Hermite), cfg_.sample_seed);
  }
}

std::vector<snmpc::ChannelSpec> WoNmpc::channels() const {
  return {{0.0, cfg_.u1_max, std::numeric_limits<double>::infinity()},
          {cfg_.u2_min, cfg_.u2_max, cfg_.u2_rate}};
}

Eigen::VectorXd WoNmpc::initial_input() const {
  return Eigen::Vector2d(cfg_.initial_input[0], cfg_.initial_input[1]);
}

snmpc::OcpSpec WoNmpc::horizon(const std::vector<double>& breaks, const Eigen::VectorXd& measured,
                               const std::optional<Eigen::VectorXd>& previous_input) const {
  if (measured.size() != kPhysStates) throw DimensionError("WoNmpc::horizon: expected 7 plant states");
  snmpc::OcpSpec s;
  s.ode = ode_;
  s.control = snmpc::ControlParam(breaks, channels());
  s.previous_input = previous_input;
  const bool first = std::abs(breaks.front() - 0.0) < 1e-9;
  const double rel = (!first || model_.cfg.ic_noise_at_t0) ? model_.cfg.ic_rel_sd : 0.0;
  s.x0 = initial_coefficients(model_, measured, cfg_.nominal ? 0.0 : rel);
  auto tensor = tensor_;
  const WoModel model = model_;
  const double x7_t0 = model_.cfg.x0[6];
  s.cost = [tensor, model, x7_t0](const Eigen::VectorXd& X, Eigen::VectorXd* grad) {
    const auto J = objective(model, *tensor, X, x7_t0, grad != nullptr);
    if (grad) *grad = -J.grad;
    return -J.value;
  };
  s.constraints = std::make_shared<chance::ConstraintSet>(terminal_constraints(model_, breaks.back()));
  s.mode = cfg_.nominal ? snmpc::ConstraintMode::Deterministic : snmpc::ConstraintMode::Chance;
  s.tightening = tight_;
  s.samples = samples_;
  s.grad.slice_var = kVolumeVar;
  s.integrator.rel_tol = cfg_.rel_tol;
  s.integrator.abs_tol = cfg_.abs_tol;
  s.sqp.max_iter = cfg_.sqp_max_iter;
  s.sqp.kkt_tol = cfg_.kkt_tol;
  s.n_fresh = cfg_.n_fresh;
  return s;
}

std::array<double, 3> draw_plant_parameters(const WoConfig& cfg, std::uint64_t plant_seed, int run) {
  std::mt19937_64 rng(polychaos::derive_seed(plant_seed, static_cast<std::uint64_t>(run)));
  std::normal_distribution<double> normal;
  const auto sd = cfg.k_sd();
  std::array<double, 3> k;
  for (int i = 0; i < 3; ++i) k[i] = cfg.k_mean[i] + sd[i] * normal(rng);
  return k;
}

snmpc::ClosedLoopProblem make_problem(std::shared_ptr<const WoNmpc> nmpc, std::uint64_t plant_seed) {
  snmpc::ClosedLoopProblem p;
  p.state_labels = {"x1", "x2", "x3", "x4", "x5", "x6", "x7"};
  p.input_labels = {"u1", "u2"};
  const WoConfig cfg = nmpc->config().model;
  p.plant = [cfg, plant_seed](int run) {
    snmpc::PlantRun r;
    r.rhs = plant_rhs(draw_plant_parameters(cfg, plant_seed, run), cfg);
    r.x0 = Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), kPhysStates);
    return r;
  };
  p.horizon = [nmpc](const std::vector<double>& breaks, const Eigen::VectorXd& measured,
                     const std::optional<Eigen::VectorXd>& previous) {
    return nmpc->horizon(breaks, measured, previous);
  };
  p.initial_input = nmpc->initial_input();
  p.terminal = [cfg](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::Vector2d(x[5] - cfg.g_limit, x[6] - cfg.volume_limit).eval();
  };
  p.profit = [cfg](const Eigen::VectorXd& x, const Eigen::VectorXd& x0) {
    return realized_profit(cfg, x, x0[6]);
  };
  return p;
}

}  // namespace pcmpc::wobench
