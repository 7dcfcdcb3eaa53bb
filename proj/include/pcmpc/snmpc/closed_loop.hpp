#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "pcmpc/odeint/dopri5.hpp"
#include "pcmpc/snmpc/ocp.hpp"

namespace pcmpc::snmpc {

enum class HorizonMode { Shrinking, Receding };

struct ClosedLoopConfig {
  HorizonMode mode = HorizonMode::Shrinking;
  std::vector<double> sampling_times;  // t_k
  double t_f = 0.0;                    // shrinking: end of batch; receding: end of simulation
  double horizon = 0.0;                // receding: t_f(k) = t_k + horizon
  int runs = 1;
  std::uint64_t plant_seed = 1;
  std::uint64_t noise_seed = 2;
  double noise_rel_sd = 0.01;  // measured = x (1 + sd N(0,1)), not at the first instant
  int points_per_interval = 8;  // plant samples written per sampling interval
  odeint::IntegratorConfig plant_integrator;

  void validate() const;
  nlohmann::json to_json() const;
  /// Unknown keys are rejected.
  static ClosedLoopConfig from_json(const nlohmann::json& j);
};

/// Control breakpoints of the horizon starting at sampling instant k.
std::vector<double> horizon_breaks(const ClosedLoopConfig& cfg, int k);

struct PlantRun {
  odeint::RhsFn rhs;
  Eigen::VectorXd x0;
};

/// Problem-specific parts of a closed-loop study.
struct ClosedLoopProblem {
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
  /// True plant of one run (drawn parameters).
  std::function<PlantRun(int run)> plant;
  /// Horizon OCP on the given breakpoints from a measured plant state.
  std::function<OcpSpec(const std::vector<double>& breaks, const Eigen::VectorXd& measured,
                        const std::optional<Eigen::VectorXd>& previous_input)>
      horizon;
  /// Physical input used as the first guess of the first horizon.
  Eigen::VectorXd initial_input;
  /// Terminal constraint values (<= 0 satisfied) and realized profit.
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x_tf, const Eigen::VectorXd& x_t0)> terminal;
  std::function<double(const Eigen::VectorXd& x_tf, const Eigen::VectorXd& x_t0)> profit;
};

struct HorizonRecord {
  double t_k = 0.0;
  int n_pi = 0;
  std::string status;
  int iterations = 0;
  bool fallback = false;
  bool infeasible = false;
  double p_hat = std::numeric_limits<double>::quiet_NaN();
  bool sampled_feasible = false;
  std::string message;
};

struct RunRecord {
  int run = 0;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;   // plant states at t
  std::vector<Eigen::VectorXd> u;   // input applied on the interval that ends at t
  std::vector<HorizonRecord> horizons;
  Eigen::VectorXd g_tf;
  bool violated = false;
  bool failed = false;  // plant integration failed or a horizon fell back
  double profit = 0.0;
  std::string message;

  int fallbacks() const;
  int infeasible_horizons() const;
};

/// Run cfg.runs independent closed loops (in parallel). The first horizon
/// does not depend on the run, so it is solved once and shared.
std::vector<RunRecord> closed_loop(const ClosedLoopConfig& cfg, const ClosedLoopProblem& problem);

/// One CSV per run (run_NNN.csv) and summary.csv in dir.
void write_run_csv(const std::string& path, const RunRecord& r, const ClosedLoopProblem& problem);
void write_summary_csv(const std::string& path, const std::vector<RunRecord>& runs);

struct BatchSummary {
  int runs = 0;
  int violations = 0;
  int failures = 0;
  int fallbacks = 0;
  int infeasible_horizons = 0;
  double mean_profit = 0.0;
};
BatchSummary summarize(const std::vector<RunRecord>& runs);

}  // namespace pcmpc::snmpc
