#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmpc/ccgrad/gradient.hpp"
#include "pcmpc/chance/constraint_set.hpp"
#include "pcmpc/chance/satisfaction.hpp"
#include "pcmpc/chance/tightening.hpp"
#include "pcmpc/galerkin/expanded_ode.hpp"
#include "pcmpc/nlp/sqp.hpp"
#include "pcmpc/odeint/dopri5.hpp"
#include "pcmpc/snmpc/control.hpp"

namespace pcmpc::snmpc {

/// Terminal cost to minimize, as a function of the stacked coefficients at
/// t_f. grad is null when no derivative is wanted.
using CostFn = std::function<double(const Eigen::VectorXd& X_tf, Eigen::VectorXd* grad)>;

/// sum_l w_mean[l] E[x_l(t_f)] + w_var[l] Var[x_l(t_f)].
struct MomentCost {
  std::vector<int> states;
  std::vector<double> mean_weight;
  std::vector<double> variance_weight;
};
CostFn moment_cost(const MomentCost& c, polychaos::BasisPtr basis);

enum class ConstraintMode {
  Chance,         // beta_cor - p_smooth(pi) <= 0
  Deterministic,  // g_i(E[x]) <= 0 for every constraint
  None,
};

struct OcpSpec {
  std::shared_ptr<const galerkin::ExpandedOde> ode;
  Eigen::VectorXd x0;  // coefficients at t_k = control.breaks().front()
  ControlParam control;
  std::optional<Eigen::VectorXd> previous_input;
  CostFn cost;
  std::shared_ptr<const chance::ConstraintSet> constraints;
  ConstraintMode mode = ConstraintMode::Chance;
  chance::TighteningResult tightening;
  std::shared_ptr<const polychaos::SampleMatrix> samples;
  ccgrad::GradConfig grad;
  odeint::IntegratorConfig integrator;
  nlp::SqpOptions sqp;
  /// Accept the SQP end point when its violation is below this.
  double accept_violation = 1e-6;
  /// Chance mode: when p_smooth at the initial guess is below this, first
  /// solve with the constraints on the means and start from that point.
  double mean_phase_below = 1e-6;
  std::uint64_t fresh_seed = 0xF4E5;
  int n_fresh = 10;

  double t_k() const { return control.breaks().front(); }
  double t_f() const { return control.breaks().back(); }
};

/// States, sensitivities and derived quantities at one decision vector.
struct OcpEvaluation {
  std::vector<Eigen::VectorXd> X;     // per constraint time
  std::vector<Eigen::MatrixXd> dX;    // per constraint time, when derivatives
  Eigen::VectorXd X_tf;
  Eigen::MatrixXd dX_tf;
  double p_smooth = 0.0;
  int n_discarded = 0;
};

/// The NLP in the scaled decision vector. Constraint rows: the chance row
/// (or one row per deterministic constraint), then the rate limits.
nlp::NlpProblem assemble(const OcpSpec& spec);

/// One model evaluation; derivatives through the forward sensitivities.
OcpEvaluation evaluate(const OcpSpec& spec, const Eigen::VectorXd& z, bool derivatives);

struct HorizonResult {
  Eigen::VectorXd z;
  Eigen::MatrixXd inputs;  // channels x intervals, physical
  nlp::SolveReport report;
  std::optional<chance::FeasibilityReport> feasibility;
  bool used_fallback = false;
  bool infeasible = false;  // no feasible point; the least-violation point is used
  bool mean_phase = false;
  std::string message;
};

/// Solve from z0. Without a feasible end point the solver's point is kept
/// when it violates less than z0; otherwise (or when the solver throws) z0
/// itself is the fallback.
HorizonResult solve_horizon(const OcpSpec& spec, const Eigen::VectorXd& z0);

}  // namespace pcmpc::snmpc
