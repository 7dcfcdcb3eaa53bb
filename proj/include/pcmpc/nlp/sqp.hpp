#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace pcmpc::nlp {

/// Values (and optionally derivatives) of objective and inequality
/// constraints c(x) <= 0 at one point.
struct Evaluation {
  double f = 0.0;
  Eigen::VectorXd grad;  // n
  Eigen::VectorXd c;     // m
  Eigen::MatrixXd jac;   // m x n
};

struct NlpProblem {
  int n = 0;
  int m = 0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  /// Fill out.f and out.c; also out.grad and out.jac when derivatives is set.
  std::function<void(const Eigen::VectorXd& x, bool derivatives, Evaluation& out)> evaluate;
};

struct SqpOptions {
  int max_iter = 200;
  double kkt_tol = 1e-6;
  double violation_tol = 1e-8;
  double armijo = 1e-4;
  double min_step = 1e-10;
  double elastic_penalty = 1e4;
  bool check_gradients = false;
  double fd_step = 1e-6;
  std::string log_path;  // iteration CSV when set
};

enum class SqpStatus { Converged, MaxIter, LineSearchFailure, Infeasible };
const char* status_name(SqpStatus s);

struct GradientCheck {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

struct SolveReport {
  SqpStatus status = SqpStatus::MaxIter;
  Eigen::VectorXd x;
  double objective = 0.0;
  double kkt = 0.0;
  double violation = 0.0;
  int iterations = 0;
  int evaluations = 0;
  Eigen::VectorXd lambda;
  GradientCheck gradient_check;
  bool converged() const { return status == SqpStatus::Converged; }
};

/// Central-difference check of the supplied derivatives at x.
GradientCheck check_gradients(const NlpProblem& p, const Eigen::VectorXd& x, double step = 1e-6);

/// SQP with Powell-damped BFGS, dual active-set QP subproblems (elastic
/// fallback when infeasible) and an L1 merit line search.
SolveReport solve(const NlpProblem& p, const Eigen::VectorXd& x0, const SqpOptions& opts = {});

}  // namespace pcmpc::nlp
