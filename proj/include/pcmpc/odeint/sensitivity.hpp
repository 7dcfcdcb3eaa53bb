#pragma once

#include "pcmpc/odeint/dopri5.hpp"

namespace pcmpc::odeint {

/// States and forward sensitivities dx/dpi on the integration grid.
struct SensitivitySolution {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::MatrixXd> S;  // dim x n_pi per grid point
  IntegratorStats stats;
  long sensitivity_equations = 0;  // dim * n_pi

  /// Index of a grid time (exact match within 1e-9 relative), or -1.
  int find(double time) const;
};

/// Simultaneous state + sensitivity integration. Only the columns whose
/// inputs have become active are propagated; the rest stay zero. Step size
/// control uses the states only.
SensitivitySolution integrate_with_sensitivities(const galerkin::ExpandedOde& ode,
                                                 const Eigen::VectorXd& x0,
                                                 const InputSchedule& schedule, double t0,
                                                 double tf,
                                                 const std::vector<double>& output_times = {},
                                                 const IntegratorConfig& cfg = {});

}  // namespace pcmpc::odeint
