#include "pcmpc/nlp/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>

#include "pcmpc/common/error.hpp"
#include "pcmpc/nlp/qp.hpp"

namespace pcmpc::nlp {

const char* status_name(SqpStatus s) {
  switch (s) {
    case SqpStatus::Converged:
      return "converged";
    case SqpStatus::MaxIter:
      return "max-iter";
    case SqpStatus::LineSearchFailure:
      return "line-search-failure";
    case SqpStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

double violation(const Eigen::VectorXd& c) { return c.size() ? std::max(0.0, c.maxCoeff()) : 0.0; }
double l1_violation(const Eigen::VectorXd& c) { return c.cwiseMax(0.0).sum(); }

void check_eval(const Evaluation& e, int n, int m, bool derivs) {
  if (e.c.size() != m) throw DimensionError("NLP callback: constraint vector size");
  if (!std::isfinite(e.f) || !e.c.allFinite()) throw ConvergenceError("NLP callback returned non-finite values");
  if (derivs) {
    if (e.grad.size() != n || e.jac.rows() != m || e.jac.cols() != n)
      throw DimensionError("NLP callback: derivative shape");
    if (!e.grad.allFinite() || !e.jac.allFinite())
      throw ConvergenceError("NLP callback returned non-finite derivatives");
  }
}

}  // namespace

GradientCheck check_gradients(const NlpProblem& p, const Eigen::VectorXd& x, double step) {
  Evaluation e0, ep, em;
  p.evaluate(x, true, e0);
  GradientCheck gc;
  for (int j = 0; j < p.n; ++j) {
    const double h = step * (1.0 + std::abs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    if (p.upper.size()) xp[j] = std::min(xp[j], p.upper[j]);
    if (p.lower.size()) xm[j] = std::max(xm[j], p.lower[j]);
    const double hh = xp[j] - xm[j];
    p.evaluate(xp, false, ep);
    p.evaluate(xm, false, em);
    auto upd = [&](double fd, double an) {
      const double err = std::abs(fd - an);
      gc.max_abs_error = std::max(gc.max_abs_error, err);
      gc.max_rel_error = std::max(gc.max_rel_error, err / std::max(1e-8, std::max(std::abs(fd), std::abs(an))));
    };
    upd((ep.f - em.f) / hh, e0.grad[j]);
    for (int i = 0; i < p.m; ++i) upd((ep.c[i] - em.c[i]) / hh, e0.jac(i, j));
  }
  return gc;
}

SolveReport solve(const NlpProblem& p, const Eigen::VectorXd& x0, const SqpOptions& opts) {
  const int n = p.n, m = p.m;
  if (x0.size() != n) throw DimensionError("solve: x0 size");
  Eigen::VectorXd lo = p.lower.size() ? p.lower : Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = p.upper.size() ? p.upper : Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  if ((lo.array() > hi.array()).any()) throw ConfigError("solve: lower bound above upper bound");
  Eigen::VectorXd x = x0.cwiseMax(lo).cwiseMin(hi);

  std::unique_ptr<std::ofstream> log;
  if (!opts.log_path.empty()) {
    log = std::make_unique<std::ofstream>(opts.log_path);
    if (!*log) throw ConfigError("cannot open '" + opts.log_path + "' for writing");
    *log << "iter,objective,kkt,violation,step\n" << std::setprecision(12);
  }

  SolveReport rep;
  if (opts.check_gradients) rep.gradient_check = check_gradients(p, x, opts.fd_step);

  Evaluation cur;
  p.evaluate(x, true, cur);
  ++rep.evaluations;
  check_eval(cur, n, m, true);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  double mu = 1.0;
  double step = 0.0;

  auto record = [&](SqpStatus st) {
    rep.status = st;
    rep.x = x;
    rep.objective = cur.f;
    rep.violation = violation(cur.c);
    rep.lambda = lambda;
    return rep;
  };

  for (int it = 0; it < opts.max_iter; ++it) {
    rep.iterations = it;
    // QP subproblem in the step d.
    const Eigen::VectorXd dlo = lo - x, dhi = hi - x;
    QpResult qp = solve_qp(B, cur.grad, cur.jac, -cur.c, dlo, dhi);
    if (qp.status == QpStatus::NotConvex) {
      B.setIdentity();
      qp = solve_qp(B, cur.grad, cur.jac, -cur.c, dlo, dhi);
    }
    Eigen::VectorXd d;
    Eigen::VectorXd lam_qp;
    if (qp.status == QpStatus::Optimal) {
      d = qp.x;
      lam_qp = qp.lambda;
    } else {
      // Elastic mode: one slack s >= 0 shared by all rows, linear and
      // lightly quadratic penalty.
      Eigen::MatrixXd He = Eigen::MatrixXd::Zero(n + 1, n + 1);
      He.topLeftCorner(n, n) = B;
      He(n, n) = 1e-6 * opts.elastic_penalty;
      Eigen::VectorXd ge(n + 1);
      ge.head(n) = cur.grad;
      ge[n] = opts.elastic_penalty;
      Eigen::MatrixXd Ae(m, n + 1);
      Ae.leftCols(n) = cur.jac;
      Ae.col(n).setConstant(-1.0);
      Eigen::VectorXd le(n + 1), ue(n + 1);
      le.head(n) = dlo;
      ue.head(n) = dhi;
      le[n] = 0.0;
      ue[n] = std::numeric_limits<double>::infinity();
      const QpResult qe = solve_qp(He, ge, Ae, -cur.c, le, ue);
      if (qe.status != QpStatus::Optimal) return record(SqpStatus::Infeasible);
      d = qe.x.head(n);
      lam_qp = qe.lambda;
    }

    // KKT residual at x with the QP multipliers.
    Eigen::VectorXd gl = cur.grad + cur.jac.transpose() * lam_qp;
    for (int j = 0; j < n; ++j) {
      // Bound multipliers absorb the gradient component at an active bound.
      if (x[j] <= lo[j] + 1e-12 && gl[j] > 0.0) gl[j] = 0.0;
      if (x[j] >= hi[j] - 1e-12 && gl[j] < 0.0) gl[j] = 0.0;
    }
    double comp = 0.0;
    for (int i = 0; i < m; ++i) comp = std::max(comp, std::abs(lam_qp[i] * cur.c[i]));
    rep.kkt = std::max(gl.cwiseAbs().maxCoeff(), comp);
    const double viol = violation(cur.c);
    if (log) *log << it << ',' << cur.f << ',' << rep.kkt << ',' << viol << ',' << step << '\n';
    if (rep.kkt <= opts.kkt_tol && viol <= opts.violation_tol) {
      lambda = lam_qp;
      return record(SqpStatus::Converged);
    }
    if (d.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + x.cwiseAbs().maxCoeff())) {
      lambda = lam_qp;
      return record(viol <= opts.violation_tol && rep.kkt <= 10 * opts.kkt_tol ? SqpStatus::Converged
                                                                               : SqpStatus::LineSearchFailure);
    }

    // Merit line search.
    mu = std::max(mu, 1.1 * (lam_qp.size() ? lam_qp.cwiseAbs().maxCoeff() : 0.0) + 1e-3);
    const double phi0 = cur.f + mu * l1_violation(cur.c);
    const double dphi = cur.grad.dot(d) + mu * (l1_violation(cur.c + cur.jac * d) - l1_violation(cur.c));
    double alpha = 1.0;
    Evaluation trial;
    bool accepted = false, have_derivs = false;
    while (alpha >= opts.min_step) {
      const Eigen::VectorXd xt = (x + alpha * d).cwiseMax(lo).cwiseMin(hi);
      const bool derivs = alpha == 1.0;
      bool ok = true;
      try {
        p.evaluate(xt, derivs, trial);
        ++rep.evaluations;
        check_eval(trial, n, m, derivs);
      } catch (const ConvergenceError&) {
        ok = false;
      } catch (const IntegrationError&) {
        ok = false;
      }
      if (ok) {
        const double phi = trial.f + mu * l1_violation(trial.c);
        if (phi <= phi0 + opts.armijo * alpha * std::min(dphi, 0.0) ||
            (dphi >= 0.0 && phi < phi0)) {
          accepted = true;
          have_derivs = derivs;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      lambda = lam_qp;
      return record(SqpStatus::LineSearchFailure);
    }
    const Eigen::VectorXd xn = (x + alpha * d).cwiseMax(lo).cwiseMin(hi);
    if (!have_derivs) {
      p.evaluate(xn, true, trial);
      ++rep.evaluations;
      check_eval(trial, n, m, true);
    }
    // Damped BFGS on the Lagrangian gradient.
    const Eigen::VectorXd s = xn - x;
    Eigen::VectorXd y = (trial.grad + trial.jac.transpose() * lam_qp) - (cur.grad + cur.jac.transpose() * lam_qp);
    const Eigen::VectorXd Bs = B * s;
    const double sBs = s.dot(Bs);
    if (sBs > 1e-16) {
      double sy = s.dot(y);
      if (sy < 0.2 * sBs) {
        const double theta = 0.8 * sBs / (sBs - sy);
        y = theta * y + (1.0 - theta) * Bs;
        sy = s.dot(y);
      }
      if (sy > 1e-16) B += y * y.transpose() / sy - Bs * Bs.transpose() / sBs;
    }
    step = alpha * d.cwiseAbs().maxCoeff();
    x = xn;
    cur = std::move(trial);
    lambda = lam_qp;
  }
  rep.iterations = opts.max_iter;
  return record(SqpStatus::MaxIter);
}

}  // namespace pcmpc::nlp
