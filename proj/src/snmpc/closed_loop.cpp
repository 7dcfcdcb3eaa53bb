#include "pcmpc/snmpc/closed_loop.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include "pcmpc/common/error.hpp"
#include "pcmpc/common/parallel.hpp"
#include "pcmpc/polychaos/samples.hpp"

namespace pcmpc::snmpc {

void ClosedLoopConfig::validate() const {
  if (sampling_times.empty()) throw ConfigError("closed loop: no sampling instants");
  for (std::size_t i = 1; i < sampling_times.size(); ++i)
    if (!(sampling_times[i] > sampling_times[i - 1]))
      throw ConfigError("closed loop: sampling instants must increase");
  if (!(t_f > sampling_times.back())) throw ConfigError("closed loop: t_f must follow the last sampling instant");
  if (mode == HorizonMode::Receding && !(horizon > 0.0)) throw ConfigError("closed loop: receding horizon length");
  if (runs < 1) throw ConfigError("closed loop: runs must be >= 1");
  if (noise_rel_sd < 0.0) throw ConfigError("closed loop: noise_rel_sd must be >= 0");
  if (points_per_interval < 1) throw ConfigError("closed loop: points_per_interval must be >= 1");
  plant_integrator.validate();
}

nlohmann::json ClosedLoopConfig::to_json() const {
  return {{"mode", mode == HorizonMode::Shrinking ? "shrinking" : "receding"},
          {"sampling_times", sampling_times},
          {"t_f", t_f},
          {"horizon", horizon},
          {"runs", runs},
          {"plant_seed", plant_seed},
          {"noise_seed", noise_seed},
          {"noise_rel_sd", noise_rel_sd},
          {"points_per_interval", points_per_interval},
          {"plant_rel_tol", plant_integrator.rel_tol},
          {"plant_abs_tol", plant_integrator.abs_tol}};
}

ClosedLoopConfig ClosedLoopConfig::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{"mode",       "sampling_times", "t_f",
                                              "horizon",    "runs",           "plant_seed",
                                              "noise_seed", "noise_rel_sd",   "points_per_interval",
                                              "plant_rel_tol", "plant_abs_tol"};
  if (!j.is_object()) throw ConfigError("closed loop config must be an object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("closed loop config: unknown key '" + key + "'");
  ClosedLoopConfig c;
  try {
    const std::string mode = j.value("mode", std::string("shrinking"));
    if (mode == "shrinking")
      c.mode = HorizonMode::Shrinking;
    else if (mode == "receding")
      c.mode = HorizonMode::Receding;
    else
      throw ConfigError("closed loop config: mode must be 'shrinking' or 'receding'");
    c.sampling_times = j.value("sampling_times", c.sampling_times);
    c.t_f = j.value("t_f", c.t_f);
    c.horizon = j.value("horizon", c.horizon);
    c.runs = j.value("runs", c.runs);
    c.plant_seed = j.value("plant_seed", c.plant_seed);
    c.noise_seed = j.value("noise_seed", c.noise_seed);
    c.noise_rel_sd = j.value("noise_rel_sd", c.noise_rel_sd);
    c.points_per_interval = j.value("points_per_interval", c.points_per_interval);
    c.plant_integrator.rel_tol = j.value("plant_rel_tol", c.plant_integrator.rel_tol);
    c.plant_integrator.abs_tol = j.value("plant_abs_tol", c.plant_integrator.abs_tol);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("closed loop config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<double> horizon_breaks(const ClosedLoopConfig& cfg, int k) {
  const auto& ts = cfg.sampling_times;
  std::vector<double> b;
  if (cfg.mode == HorizonMode::Shrinking) {
    b.assign(ts.begin() + k, ts.end());
    b.push_back(cfg.t_f);
    return b;
  }
  const double dt = ts.size() > 1 ? ts[1] - ts[0] : cfg.horizon;
  const double end = ts[k] + cfg.horizon;
  for (double t = ts[k]; t < end - 1e-9 * dt; t += dt) b.push_back(t);
  b.push_back(end);
  return b;
}

int RunRecord::fallbacks() const {
  int n = 0;
  for (const auto& h : horizons) n += h.fallback;
  return n;
}

int RunRecord::infeasible_horizons() const {
  int n = 0;
  for (const auto& h : horizons) n += h.infeasible;
  return n;
}

namespace {

HorizonRecord record_of(const HorizonResult& h, double t_k, int n_pi) {
  HorizonRecord r;
  r.t_k = t_k;
  r.n_pi = n_pi;
  r.status = h.used_fallback ? std::string("fallback")
             : h.infeasible  ? std::string("infeasible")
                             : std::string(nlp::status_name(h.report.status));
  r.iterations = h.report.iterations;
  r.fallback = h.used_fallback;
  r.infeasible = h.infeasible;
  r.message = h.message;
  if (h.feasibility) {
    r.p_hat = h.feasibility->p_hat;
    r.sampled_feasible = h.feasibility->sampled_feasible;
  }
  return r;
}

struct FirstHorizon {
  Eigen::VectorXd measured;
  ControlParam control;
  HorizonResult result;
};

RunRecord run_one(const ClosedLoopConfig& cfg, const ClosedLoopProblem& problem, int run,
                  const std::optional<FirstHorizon>& first) {
  RunRecord rec;
  rec.run = run;
  const PlantRun plant = problem.plant(run);
  Eigen::VectorXd x = plant.x0;
  const int K = static_cast<int>(cfg.sampling_times.size());
  std::mt19937_64 rng(polychaos::derive_seed(cfg.noise_seed, static_cast<std::uint64_t>(run)));
  std::normal_distribution<double> normal;

  std::optional<Eigen::VectorXd> applied;
  Eigen::VectorXd z_prev;
  ControlParam ctrl_prev;
  rec.t.push_back(cfg.sampling_times.front());
  rec.x.push_back(x);
  for (int k = 0; k < K; ++k) {
    const double t_k = cfg.sampling_times[k];
    const double t_next = k + 1 < K ? cfg.sampling_times[k + 1] : cfg.t_f;
    Eigen::VectorXd measured = x;
    if (k > 0)
      for (Eigen::Index l = 0; l < x.size(); ++l) measured[l] = x[l] * (1.0 + cfg.noise_rel_sd * normal(rng));
    const auto breaks = horizon_breaks(cfg, k);

    HorizonResult h;
    ControlParam ctrl;
    if (k == 0 && first && first->measured == measured) {
      h = first->result;
      ctrl = first->control;
    } else {
      try {
        const OcpSpec spec = problem.horizon(breaks, measured, applied);
        ctrl = spec.control;
        const Eigen::VectorXd z0 =
            k == 0 ? ctrl.constant(problem.initial_input) : ctrl_prev.shift(z_prev, ctrl);
        h = solve_horizon(spec, z0);
      } catch (const Error& e) {
        if (k == 0) throw;
        ctrl = ControlParam(breaks, ctrl_prev.channels());
        h.z = ctrl_prev.shift(z_prev, ctrl);
        h.inputs = ctrl.to_physical(h.z);
        h.used_fallback = true;
        h.report.status = nlp::SqpStatus::Infeasible;
        h.message = e.what();
      }
    }
    rec.horizons.push_back(record_of(h, t_k, ctrl.n_pi()));
    if (h.used_fallback) {
      rec.failed = true;
      if (rec.message.empty()) rec.message = "t=" + std::to_string(t_k) + ": " + h.message;
    }
    const Eigen::VectorXd u = h.inputs.col(0);
    applied = u;
    z_prev = h.z;
    ctrl_prev = ctrl;

    std::vector<double> out;
    for (int p = 1; p < cfg.points_per_interval; ++p)
      out.push_back(t_k + (t_next - t_k) * p / cfg.points_per_interval);
    try {
      const auto tr = odeint::integrate(plant.rhs, x, odeint::InputSchedule::constant(u, t_k, t_next), t_k,
                                        t_next, out, cfg.plant_integrator);
      for (std::size_t i = 1; i < tr.t.size(); ++i) {
        rec.t.push_back(tr.t[i]);
        rec.x.push_back(tr.x[i]);
      }
      x = tr.final();
    } catch (const IntegrationError& e) {
      rec.failed = true;
      rec.message = std::string("plant: ") + e.what();
      break;
    }
    while (rec.u.size() < rec.t.size()) rec.u.push_back(u);
  }
  rec.u.resize(rec.t.size(), applied ? *applied : problem.initial_input);
  rec.g_tf = problem.terminal(x, plant.x0);
  rec.violated = (rec.g_tf.array() > 0.0).any();
  rec.profit = problem.profit(x, plant.x0);
  return rec;
}

}  // namespace

std::vector<RunRecord> closed_loop(const ClosedLoopConfig& cfg, const ClosedLoopProblem& problem) {
  cfg.validate();
  if (!problem.plant || !problem.horizon || !problem.terminal || !problem.profit)
    throw ConfigError("closed loop: incomplete problem definition");
  std::optional<FirstHorizon> first;
  {
    const PlantRun p0 = problem.plant(0);
    const OcpSpec spec = problem.horizon(horizon_breaks(cfg, 0), p0.x0, std::nullopt);
    first = FirstHorizon{p0.x0, spec.control,
                         solve_horizon(spec, spec.control.constant(problem.initial_input))};
  }
  std::vector<RunRecord> runs(cfg.runs);
  parallel_for(cfg.runs, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) runs[r] = run_one(cfg, problem, static_cast<int>(r), first);
  });
  return runs;
}

void write_run_csv(const std::string& path, const RunRecord& r, const ClosedLoopProblem& problem) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << "time";
  const int nx = r.x.empty() ? 0 : static_cast<int>(r.x.front().size());
  const int nu = r.u.empty() ? 0 : static_cast<int>(r.u.front().size());
  for (int l = 0; l < nx; ++l)
    os << ',' << (l < static_cast<int>(problem.state_labels.size()) ? problem.state_labels[l] : "x" + std::to_string(l + 1));
  for (int c = 0; c < nu; ++c)
    os << ',' << (c < static_cast<int>(problem.input_labels.size()) ? problem.input_labels[c] : "u" + std::to_string(c + 1));
  os << '\n' << std::setprecision(12);
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    os << r.t[i];
    for (int l = 0; l < nx; ++l) os << ',' << r.x[i][l];
    for (int c = 0; c < nu; ++c) os << ',' << r.u[i][c];
    os << '\n';
  }
}

void write_summary_csv(const std::string& path, const std::vector<RunRecord>& runs) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  const int ng = runs.empty() ? 0 : static_cast<int>(runs.front().g_tf.size());
  os << "run";
  for (int i = 0; i < ng; ++i) os << ",g" << i + 1 << "_tf";
  os << ",profit,violated,failed,fallbacks,statuses\n" << std::setprecision(12);
  for (const auto& r : runs) {
    os << r.run;
    for (int i = 0; i < ng; ++i) os << ',' << r.g_tf[i];
    os << ',' << r.profit << ',' << r.violated << ',' << r.failed << ',' << r.fallbacks() << ',';
    for (std::size_t k = 0; k < r.horizons.size(); ++k) os << (k ? ";" : "") << r.horizons[k].status;
    os << '\n';
  }
}

BatchSummary summarize(const std::vector<RunRecord>& runs) {
  BatchSummary s;
  s.runs = static_cast<int>(runs.size());
  for (const auto& r : runs) {
    s.violations += r.violated;
    s.failures += r.failed;
    s.fallbacks += r.fallbacks();
    s.infeasible_horizons += r.infeasible_horizons();
    s.mean_profit += r.profit;
  }
  if (s.runs) s.mean_profit /= s.runs;
  return s;
}

}  // namespace pcmpc::snmpc
