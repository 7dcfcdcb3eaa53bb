#include "pcmpc/odeint/sensitivity.hpp"

#include <cmath>

#include "pcmpc/common/error.hpp"
#include "pcmpc/galerkin/expanded_ode.hpp"

namespace pcmpc::odeint {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int SensitivitySolution::find(double time) const {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - time) <= 1e-9 * std::max(1.0, std::abs(time))) return static_cast<int>(i);
  return -1;
}

SensitivitySolution integrate_with_sensitivities(const galerkin::ExpandedOde& ode,
                                                 const Eigen::VectorXd& x0,
                                                 const InputSchedule& schedule, double t0,
                                                 double tf, const std::vector<double>& output_times,
                                                 const IntegratorConfig& cfg) {
  if (!(tf > t0)) throw DimensionError("integrate_with_sensitivities: empty time span");
  if (x0.size() != ode.dim()) throw DimensionError("integrate_with_sensitivities: state size mismatch");
  schedule.validate();
  if (schedule.du_dpi.empty() && schedule.n_pi > 0)
    throw DimensionError("integrate_with_sensitivities: schedule carries no du/dpi");
  const int dim = ode.dim();
  const int n_pi = schedule.n_pi;

  // Active prefix per interval: columns touched by this or an earlier interval.
  std::vector<int> active(schedule.n_intervals(), 0);
  int reach = 0;
  for (int j = 0; j < schedule.n_intervals(); ++j) {
    if (n_pi > 0) {
      const auto& m = schedule.du_dpi[j];
      for (int c = n_pi - 1; c >= reach; --c)
        if (m.col(c).cwiseAbs().maxCoeff() > 0.0) {
          reach = c + 1;
          break;
        }
    }
    active[j] = reach;
  }

  SensitivitySolution sol;
  sol.sensitivity_equations = static_cast<long>(dim) * n_pi;
  const auto grid = time_grid(t0, tf, schedule, output_times);
  Eigen::VectorXd x = x0;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim, n_pi);
  sol.t.push_back(grid[0]);
  sol.x.push_back(x);
  sol.S.push_back(S);
  auto ws = ode.make_workspace();
  double h = 0.0;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const int j = schedule.interval(grid[g]);
    const int na = active[j];
    const Eigen::VectorXd u = schedule.values.col(j);
    Eigen::MatrixXd du = n_pi > 0 ? Eigen::MatrixXd(schedule.du_dpi[j].leftCols(na))
                                  : Eigen::MatrixXd(ode.n_inputs(), 0);
    Eigen::VectorXd y(dim + static_cast<Eigen::Index>(dim) * na);
    y.head(dim) = x;
    Eigen::Map<RowMajor>(y.data() + dim, dim, na) = S.leftCols(na);
    RhsFn f = [&](const Eigen::Ref<const Eigen::VectorXd>& yy, const Eigen::Ref<const Eigen::VectorXd>& uu,
                  Eigen::Ref<Eigen::VectorXd> dy) {
      ode.rhs_with_sensitivity(yy.head(dim), uu, du, yy.data() + dim, na, na, dy.head(dim),
                               dy.data() + dim, ws);
    };
    Dopri5 stepper(static_cast<int>(y.size()), dim, cfg);
    stepper.advance(f, u, grid[g], grid[g + 1], y, h, sol.stats);
    x = y.head(dim);
    S.leftCols(na) = Eigen::Map<const RowMajor>(y.data() + dim, dim, na);
    sol.t.push_back(grid[g + 1]);
    sol.x.push_back(x);
    sol.S.push_back(S);
  }
  return sol;
}

}  // namespace pcmpc::odeint
