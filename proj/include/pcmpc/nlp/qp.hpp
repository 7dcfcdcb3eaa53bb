#pragma once

#include <Eigen/Core>

namespace pcmpc::nlp {

enum class QpStatus { Optimal, Infeasible, MaxIter, NotConvex };

struct QpResult {
  QpStatus status = QpStatus::Optimal;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;        // one multiplier per row of A (>= 0)
  Eigen::VectorXd lambda_lower;  // bound multipliers (>= 0)
  Eigen::VectorXd lambda_upper;
  double objective = 0.0;
  int iterations = 0;
};

/// min 1/2 x'Hx + g'x  s.t.  A x <= b,  lower <= x <= upper
/// Dual active-set method of Goldfarb and Idnani; H must be positive
/// definite. Bounds may be infinite (empty vectors mean no bounds).
QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& A,
                  const Eigen::VectorXd& b, const Eigen::VectorXd& lower = {},
                  const Eigen::VectorXd& upper = {}, int max_iter = 0);

}  // namespace pcmpc::nlp
