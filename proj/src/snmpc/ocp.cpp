#include "pcmpc/snmpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcmpc/common/error.hpp"
#include "pcmpc/odeint/sensitivity.hpp"
#include "pcmpc/polychaos/expansion.hpp"

namespace pcmpc::snmpc {

CostFn moment_cost(const MomentCost& c, polychaos::BasisPtr basis) {
  if (c.states.size() != c.mean_weight.size() || c.states.size() != c.variance_weight.size())
    throw ConfigError("moment_cost: weight lists must match the state list");
  return [c, basis](const Eigen::VectorXd& X, Eigen::VectorXd* grad) {
    const int n = basis->size();
    const auto& norms = basis->norms();
    double f = 0.0;
    if (grad) *grad = Eigen::VectorXd::Zero(X.size());
    for (std::size_t j = 0; j < c.states.size(); ++j) {
      const auto a = X.segment(static_cast<Eigen::Index>(c.states[j]) * n, n);
      f += c.mean_weight[j] * a[0] + c.variance_weight[j] * polychaos::variance(a, norms);
      if (grad) {
        auto g = grad->segment(static_cast<Eigen::Index>(c.states[j]) * n, n);
        g += 2.0 * c.variance_weight[j] * a.cwiseProduct(norms);
        g[0] += c.mean_weight[j] - 2.0 * c.variance_weight[j] * a[0] * norms[0];
      }
    }
    return f;
  };
}

namespace {

void validate(const OcpSpec& s) {
  if (!s.ode) throw ConfigError("OcpSpec: no model");
  if (!s.cost) throw ConfigError("OcpSpec: no cost");
  if (s.x0.size() != s.ode->dim()) throw DimensionError("OcpSpec: initial coefficient size");
  if (s.control.n_channels() != s.ode->n_inputs()) throw DimensionError("OcpSpec: input channel count");
  if (s.mode == ConstraintMode::None) return;
  if (!s.constraints) throw ConfigError("OcpSpec: constraint mode needs a constraint set");
  if (!s.constraints->basis().same_as(s.ode->basis()) ||
      s.constraints->n_states() * s.ode->n_terms() != s.ode->dim())
    throw DimensionError("OcpSpec: constraint set does not match the model");
  for (double t : s.constraints->times())
    if (t < s.t_k() - 1e-9 * std::max(1.0, std::abs(s.t_k())) ||
        t > s.t_f() + 1e-9 * std::max(1.0, std::abs(s.t_f())))
      throw ConfigError("OcpSpec: constraint time " + std::to_string(t) + " outside the horizon");
  if (s.mode == ConstraintMode::Chance && !s.samples) throw ConfigError("OcpSpec: chance mode needs samples");
}

int grid_index(const std::vector<double>& grid, double t) {
  int best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - t) < std::abs(grid[best] - t)) best = static_cast<int>(i);
  return best;
}

}  // namespace

OcpEvaluation evaluate(const OcpSpec& spec, const Eigen::VectorXd& z, bool derivatives) {
  const auto sched = spec.control.schedule(z);
  std::vector<double> out_times;
  if (spec.constraints) out_times = spec.constraints->times();
  OcpEvaluation ev;
  std::vector<double> grid;
  std::vector<Eigen::VectorXd> xs;
  std::vector<Eigen::MatrixXd> Ss;
  if (derivatives) {
    auto sol = odeint::integrate_with_sensitivities(*spec.ode, spec.x0, sched, spec.t_k(), spec.t_f(),
                                                    out_times, spec.integrator);
    grid = std::move(sol.t);
    xs = std::move(sol.x);
    Ss = std::move(sol.S);
  } else {
    auto tr = odeint::integrate(*spec.ode, spec.x0, sched, spec.t_k(), spec.t_f(), out_times, spec.integrator);
    grid = std::move(tr.t);
    xs = std::move(tr.x);
  }
  ev.X_tf = xs.back();
  if (derivatives) ev.dX_tf = Ss.back();
  for (double t : out_times) {
    const int i = grid_index(grid, t);
    ev.X.push_back(xs[i]);
    if (derivatives) ev.dX.push_back(Ss[i]);
  }
  return ev;
}

nlp::NlpProblem assemble(const OcpSpec& spec) {
  validate(spec);
  const int n = spec.control.n_pi();
  const auto rate = spec.control.rate_constraints(spec.previous_input);
  int m_state = 0;
  if (spec.mode == ConstraintMode::Chance) m_state = 1;
  if (spec.mode == ConstraintMode::Deterministic) m_state = spec.constraints->size();

  nlp::NlpProblem p;
  p.n = n;
  p.m = m_state + rate.rows();
  p.lower = Eigen::VectorXd::Zero(n);
  p.upper = Eigen::VectorXd::Ones(n);
  p.evaluate = [spec, rate, m_state, n](const Eigen::VectorXd& z, bool derivs, nlp::Evaluation& out) {
    const OcpEvaluation ev = evaluate(spec, z, derivs);
    Eigen::VectorXd dcost;
    out.f = spec.cost(ev.X_tf, derivs ? &dcost : nullptr);
    out.c.resize(m_state + rate.rows());
    if (derivs) {
      out.grad = ev.dX_tf.transpose() * dcost;
      out.jac = Eigen::MatrixXd::Zero(out.c.size(), n);
    }
    if (spec.mode == ConstraintMode::Chance) {
      if (derivs) {
        const auto g = ccgrad::gradient(*spec.constraints, ev.X, *spec.samples, ev.dX, spec.grad);
        out.c[0] = spec.tightening.beta_cor - g.p_smooth;
        out.jac.row(0) = -g.dP_dpi.transpose();
      } else {
        out.c[0] = spec.tightening.beta_cor -
                   ccgrad::smooth_probability(*spec.constraints, ev.X, *spec.samples, spec.grad);
      }
    } else if (spec.mode == ConstraintMode::Deterministic) {
      const auto& cs = *spec.constraints;
      Eigen::VectorXd psi = Eigen::VectorXd::Zero(cs.basis().size());
      psi[0] = 1.0;
      for (int i = 0; i < cs.size(); ++i) {
        const int t = cs.functions()[i].time;
        out.c[i] = cs.functions()[i].eval(cs.states_at(ev.X, t, psi));
        if (derivs) out.jac.row(i) = (ev.dX[t].transpose() * cs.gradient(i, ev.X, psi)).transpose();
      }
    }
    if (rate.rows() > 0) {
      out.c.tail(rate.rows()) = rate.A * z - rate.b;
      if (derivs) out.jac.bottomRows(rate.rows()) = rate.A;
    }
  };
  return p;
}

HorizonResult solve_horizon(const OcpSpec& spec, const Eigen::VectorXd& z0) {
  HorizonResult r;
  if (spec.control.n_intervals() == 0) {
    r.z.resize(0);
    r.inputs.resize(spec.control.n_channels(), 0);
    r.report.status = nlp::SqpStatus::Converged;
    return r;
  }
  if (z0.size() != spec.control.n_pi()) throw DimensionError("solve_horizon: initial guess size");
  const auto problem = assemble(spec);
  const Eigen::VectorXd guess = z0.cwiseMax(0.0).cwiseMin(1.0);
  Eigen::VectorXd start = guess;
  double guess_violation = std::numeric_limits<double>::infinity();
  try {
    nlp::Evaluation e0;
    problem.evaluate(guess, false, e0);
    guess_violation = e0.c.size() ? std::max(0.0, e0.c.maxCoeff()) : 0.0;
    if (spec.mode == ConstraintMode::Chance && spec.mean_phase_below > 0.0 &&
        spec.tightening.beta_cor - e0.c[0] < spec.mean_phase_below) {
      OcpSpec mean_spec = spec;
      mean_spec.mode = ConstraintMode::Deterministic;
      const auto pre = nlp::solve(assemble(mean_spec), start, spec.sqp);
      if (pre.violation <= spec.accept_violation) start = pre.x;
      r.mean_phase = true;
    }
    r.report = nlp::solve(problem, start, spec.sqp);
    if (r.report.violation <= spec.accept_violation) {
      r.z = r.report.x;
    } else {
      const bool solver_better = r.report.violation < guess_violation;
      r.z = solver_better ? r.report.x : guess;
      r.infeasible = true;
      r.message = std::string("constraints cannot be met (") + nlp::status_name(r.report.status) + "); " +
                  (solver_better ? "least-violation point applied" : "shifted guess has least violation");
    }
  } catch (const Error& e) {
    r.z = guess;
    r.used_fallback = true;
    r.report.status = nlp::SqpStatus::Infeasible;
    r.message = e.what();
  }
  r.inputs = spec.control.to_physical(r.z);
  if (spec.mode == ConstraintMode::Chance) {
    try {
      const auto ev = evaluate(spec, r.z, false);
      r.feasibility = chance::feasibility_report(*spec.constraints, ev.X, spec.tightening, *spec.samples,
                                                 spec.fresh_seed, spec.n_fresh);
    } catch (const Error& e) {
      if (r.message.empty()) r.message = e.what();
    }
  }
  return r;
}

}  // namespace pcmpc::snmpc
