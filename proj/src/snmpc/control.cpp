#include "pcmpc/snmpc/control.hpp"

#include <cmath>

#include "pcmpc/common/error.hpp"

namespace pcmpc::snmpc {

ControlParam::ControlParam(std::vector<double> breaks, std::vector<ChannelSpec> channels)
    : breaks_(std::move(breaks)), channels_(std::move(channels)) {
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1])) throw ConfigError("ControlParam: breakpoints must increase");
  for (const auto& c : channels_) {
    if (!(c.upper > c.lower)) throw ConfigError("ControlParam: empty input range");
    if (!(c.rate_limit > 0.0)) throw ConfigError("ControlParam: rate limit must be positive");
  }
}

Eigen::MatrixXd ControlParam::to_physical(const Eigen::VectorXd& z) const {
  if (z.size() != n_pi()) throw DimensionError("ControlParam: decision vector size");
  Eigen::MatrixXd u(n_channels(), n_intervals());
  for (int i = 0; i < n_intervals(); ++i)
    for (int c = 0; c < n_channels(); ++c) {
      const auto& ch = channels_[c];
      u(c, i) = ch.lower + (ch.upper - ch.lower) * z[index(i, c)];
    }
  return u;
}

Eigen::VectorXd ControlParam::from_physical(const Eigen::MatrixXd& values) const {
  if (values.rows() != n_channels() || values.cols() != n_intervals())
    throw DimensionError("ControlParam: input matrix shape");
  Eigen::VectorXd z(n_pi());
  for (int i = 0; i < n_intervals(); ++i)
    for (int c = 0; c < n_channels(); ++c) {
      const auto& ch = channels_[c];
      z[index(i, c)] = (values(c, i) - ch.lower) / (ch.upper - ch.lower);
    }
  return z;
}

Eigen::VectorXd ControlParam::constant(const Eigen::VectorXd& u) const {
  if (u.size() != n_channels()) throw DimensionError("ControlParam: input size");
  return from_physical(u.replicate(1, n_intervals()));
}

odeint::InputSchedule ControlParam::schedule(const Eigen::VectorXd& z) const {
  odeint::InputSchedule s;
  s.breaks = breaks_;
  s.values = to_physical(z);
  s.n_pi = n_pi();
  s.du_dpi.reserve(n_intervals());
  for (int i = 0; i < n_intervals(); ++i) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_channels(), n_pi());
    for (int c = 0; c < n_channels(); ++c) d(c, index(i, c)) = channels_[c].upper - channels_[c].lower;
    s.du_dpi.push_back(std::move(d));
  }
  return s;
}

LinearInequalities ControlParam::rate_constraints(const std::optional<Eigen::VectorXd>& previous) const {
  std::vector<std::pair<Eigen::RowVectorXd, double>> rows;
  for (int c = 0; c < n_channels(); ++c) {
    const auto& ch = channels_[c];
    if (!std::isfinite(ch.rate_limit)) continue;
    const double span = ch.upper - ch.lower;
    const double r = ch.rate_limit / span;
    for (int i = 0; i + 1 < n_intervals(); ++i) {
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n_pi());
      a[index(i + 1, c)] = 1.0;
      a[index(i, c)] = -1.0;
      rows.emplace_back(a, r);
      rows.emplace_back(-a, r);
    }
    if (previous && n_intervals() > 0) {
      if (previous->size() != n_channels()) throw DimensionError("rate_constraints: previous input size");
      const double zp = ((*previous)[c] - ch.lower) / span;
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n_pi());
      a[index(0, c)] = 1.0;
      rows.emplace_back(a, r + zp);
      rows.emplace_back(-a, r - zp);
    }
  }
  LinearInequalities L;
  L.A.resize(static_cast<Eigen::Index>(rows.size()), n_pi());
  L.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    L.A.row(k) = rows[k].first;
    L.b[k] = rows[k].second;
  }
  return L;
}

Eigen::VectorXd ControlParam::shift(const Eigen::VectorXd& z, const ControlParam& next) const {
  if (next.n_channels() != n_channels()) throw DimensionError("ControlParam::shift: channel mismatch");
  const Eigen::MatrixXd u = to_physical(z);
  Eigen::MatrixXd v(n_channels(), next.n_intervals());
  for (int i = 0; i < next.n_intervals(); ++i) {
    const int src = std::min(i + 1, n_intervals() - 1);
    v.col(i) = src >= 0 ? Eigen::VectorXd(u.col(src)) : Eigen::VectorXd::Zero(n_channels());
  }
  return next.from_physical(v);
}

}  // namespace pcmpc::snmpc
