#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pcmpc/odeint/dopri5.hpp"

namespace pcmpc::snmpc {

struct ChannelSpec {
  double lower = 0.0;
  double upper = 1.0;
  /// Largest |u(i+1) - u(i)| between neighbouring intervals, physical units.
  double rate_limit = std::numeric_limits<double>::infinity();
};

/// Rows of A z <= b.
struct LinearInequalities {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  int rows() const { return static_cast<int>(A.rows()); }
};

/// Piecewise-constant inputs on the breakpoints. The decision vector is
/// scaled to [0, 1] per channel and stored interval-major:
/// z = [u_1(0), u_2(0), u_1(1), ...].
class ControlParam {
 public:
  ControlParam() = default;
  ControlParam(std::vector<double> breaks, std::vector<ChannelSpec> channels);

  int n_channels() const { return static_cast<int>(channels_.size()); }
  int n_intervals() const { return breaks_.empty() ? 0 : static_cast<int>(breaks_.size()) - 1; }
  int n_pi() const { return n_channels() * n_intervals(); }
  int index(int interval, int channel) const { return interval * n_channels() + channel; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<ChannelSpec>& channels() const { return channels_; }

  /// channels x intervals in physical units.
  Eigen::MatrixXd to_physical(const Eigen::VectorXd& z) const;
  Eigen::VectorXd from_physical(const Eigen::MatrixXd& values) const;
  /// Same value on every interval.
  Eigen::VectorXd constant(const Eigen::VectorXd& u) const;

  /// Input schedule with du/dz per interval.
  odeint::InputSchedule schedule(const Eigen::VectorXd& z) const;

  /// Rate limits between neighbouring intervals and, when given, between
  /// the previously applied input and the first interval.
  LinearInequalities rate_constraints(const std::optional<Eigen::VectorXd>& previous = {}) const;

  /// Drop the first interval and repeat the last one: warm start for the
  /// next horizon with breaks next_breaks.
  Eigen::VectorXd shift(const Eigen::VectorXd& z, const ControlParam& next) const;

 private:
  std::vector<double> breaks_;
  std::vector<ChannelSpec> channels_;
};

}  // namespace pcmpc::snmpc
