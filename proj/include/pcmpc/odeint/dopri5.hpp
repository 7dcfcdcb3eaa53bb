#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pcmpc::galerkin {
class ExpandedOde;
class PolynomialOde;
}  // namespace pcmpc::galerkin

namespace pcmpc::odeint {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0: automatic
  long max_steps = 1000000;
  bool dense_output = false;

  void validate() const;
};

/// Piecewise-constant inputs on [breaks[j], breaks[j+1]); the last value is
/// held past the final break. du_dpi[j] (n_inputs x n_pi) is the derivative
/// of the interval-j input with respect to the decision vector, if any.
struct InputSchedule {
  std::vector<double> breaks;
  Eigen::MatrixXd values;  // n_inputs x intervals
  std::vector<Eigen::MatrixXd> du_dpi;
  int n_pi = 0;

  static InputSchedule constant(const Eigen::VectorXd& u, double t0, double tf);

  int n_inputs() const { return static_cast<int>(values.rows()); }
  int n_intervals() const { return static_cast<int>(values.cols()); }
  int interval(double t) const;
  Eigen::VectorXd at(double t) const { return values.col(interval(t)); }
  void validate() const;
};

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// One accepted step of dense output: y(t0 + theta h) from five vectors.
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  Eigen::MatrixXd r;  // dim x 5
  Eigen::VectorXd eval(double t) const;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<DenseSegment> segments;  // only with dense_output
  IntegratorStats stats;

  const Eigen::VectorXd& final() const { return x.back(); }
  /// Value at a grid time, or dense interpolation between grid points.
  Eigen::VectorXd at(double time) const;
  /// time, then one column per state (labels optional).
  void write_csv(const std::string& path, const std::vector<std::string>& labels = {}) const;
};

/// Autonomous right-hand side dy = f(y, u).
using RhsFn = std::function<void(const Eigen::Ref<const Eigen::VectorXd>& y,
                                 const Eigen::Ref<const Eigen::VectorXd>& u,
                                 Eigen::Ref<Eigen::VectorXd> dy)>;

/// Dormand-Prince 5(4) stepper with Hairer's dense output and step control.
/// The error norm uses only the first n_err components.
class Dopri5 {
 public:
  Dopri5(int n, int n_err, IntegratorConfig cfg);

  /// Advance y from t0 to t1 with constant u. h is the step guess in and the
  /// last proposed step out (0 requests an automatic initial step).
  void advance(const RhsFn& f, const Eigen::Ref<const Eigen::VectorXd>& u, double t0, double t1,
               Eigen::Ref<Eigen::VectorXd> y, double& h, IntegratorStats& stats,
               std::vector<DenseSegment>* dense = nullptr);

  const IntegratorConfig& config() const { return cfg_; }

 private:
  double error_norm(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                    const Eigen::VectorXd& err) const;
  double initial_step(const RhsFn& f, const Eigen::Ref<const Eigen::VectorXd>& u, double t0,
                      double t1, const Eigen::VectorXd& y0, IntegratorStats& stats);

  int n_;
  int n_err_;
  IntegratorConfig cfg_;
  Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;
};

/// Sorted union of t0, tf, schedule breaks and extra output times in [t0, tf].
std::vector<double> time_grid(double t0, double tf, const InputSchedule& schedule,
                              const std::vector<double>& output_times);

/// Integrate f over [t0, tf], restarting at every input break and output time.
Trajectory integrate(const RhsFn& f, const Eigen::VectorXd& x0, const InputSchedule& schedule,
                     double t0, double tf, const std::vector<double>& output_times = {},
                     const IntegratorConfig& cfg = {});

Trajectory integrate(const galerkin::ExpandedOde& ode, const Eigen::VectorXd& x0,
                     const InputSchedule& schedule, double t0, double tf,
                     const std::vector<double>& output_times = {}, const IntegratorConfig& cfg = {});

/// Pointwise model at fixed parameter values.
Trajectory integrate(const galerkin::PolynomialOde& model, const Eigen::VectorXd& param_values,
                     const Eigen::VectorXd& x0, const InputSchedule& schedule, double t0, double tf,
                     const std::vector<double>& output_times = {}, const IntegratorConfig& cfg = {});

}  // namespace pcmpc::odeint
