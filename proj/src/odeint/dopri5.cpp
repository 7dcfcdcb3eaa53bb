#include "pcmpc/odeint/dopri5.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "pcmpc/common/error.hpp"
#include "pcmpc/galerkin/expanded_ode.hpp"
#include "pcmpc/galerkin/polynomial_ode.hpp"

namespace pcmpc::odeint {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafe = 0.9, kFacMin = 0.2, kFacMax = 10.0, kBeta = 0.04;

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(max_step > 0.0)) throw ConfigError("integrator max_step must be positive");
  if (max_steps < 1) throw ConfigError("integrator max_steps must be positive");
}

InputSchedule InputSchedule::constant(const Eigen::VectorXd& u, double t0, double tf) {
  InputSchedule s;
  s.breaks = {t0, tf};
  s.values = u;
  return s;
}

int InputSchedule::interval(double t) const {
  if (values.cols() == 0) throw DimensionError("InputSchedule: no intervals");
  int j = 0;
  while (j + 1 < n_intervals() && t >= breaks[j + 1]) ++j;
  return j;
}

void InputSchedule::validate() const {
  if (static_cast<int>(breaks.size()) != n_intervals() + 1 || n_intervals() < 1)
    throw DimensionError("InputSchedule: need one more break than intervals");
  for (std::size_t j = 1; j < breaks.size(); ++j)
    if (!(breaks[j] > breaks[j - 1])) throw DimensionError("InputSchedule: breaks must increase");
  if (!du_dpi.empty()) {
    if (static_cast<int>(du_dpi.size()) != n_intervals())
      throw DimensionError("InputSchedule: one du/dpi block per interval");
    for (const auto& m : du_dpi)
      if (m.rows() != n_inputs() || m.cols() != n_pi) throw DimensionError("InputSchedule: du/dpi shape");
  }
  if (!values.allFinite()) throw DimensionError("InputSchedule: non-finite input");
}

Eigen::VectorXd DenseSegment::eval(double t) const {
  const double th = (t - t0) / h;
  const double th1 = 1.0 - th;
  return r.col(0) + th * (r.col(1) + th1 * (r.col(2) + th * (r.col(3) + th1 * r.col(4))));
}

Eigen::VectorXd Trajectory::at(double time) const {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] == time) return x[i];
  for (const auto& s : segments)
    if (time >= s.t0 && time <= s.t0 + s.h) return s.eval(time);
  throw DimensionError("Trajectory::at: time not on the grid and no dense output covers it");
}

void Trajectory::write_csv(const std::string& path, const std::vector<std::string>& labels) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << "time";
  const Eigen::Index n = x.empty() ? 0 : x.front().size();
  for (Eigen::Index c = 0; c < n; ++c)
    os << ',' << (static_cast<std::size_t>(c) < labels.size() ? labels[c] : "x" + std::to_string(c));
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t[i];
    for (Eigen::Index c = 0; c < n; ++c) os << ',' << x[i][c];
    os << '\n';
  }
}

Dopri5::Dopri5(int n, int n_err, IntegratorConfig cfg) : n_(n), n_err_(n_err), cfg_(cfg) {
  cfg_.validate();
  if (n_err_ < 1 || n_err_ > n_) n_err_ = n_;
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &err_}) v->resize(n_);
}

double Dopri5::error_norm(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                          const Eigen::VectorXd& err) const {
  double s = 0.0;
  for (int i = 0; i < n_err_; ++i) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sk;
    s += q * q;
  }
  return std::sqrt(s / n_err_);
}

double Dopri5::initial_step(const RhsFn& f, const Eigen::Ref<const Eigen::VectorXd>& u, double t0,
                            double t1, const Eigen::VectorXd& y0, IntegratorStats& stats) {
  const double span = t1 - t0;
  const double hmax = std::min(cfg_.max_step, span);
  if (cfg_.initial_step > 0.0) return std::min(cfg_.initial_step, hmax);
  double dnf = 0.0, dny = 0.0;
  for (int i = 0; i < n_err_; ++i) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y0[i]);
    dnf += (k1_[i] / sk) * (k1_[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  dnf = std::sqrt(dnf / n_err_);
  dny = std::sqrt(dny / n_err_);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, hmax);
  ytmp_ = y0 + h * k1_;
  f(ytmp_, u, k2_);
  ++stats.rhs_evals;
  double der2 = 0.0;
  for (int i = 0; i < n_err_; ++i) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y0[i]);
    const double q = (k2_[i] - k1_[i]) / sk;
    der2 += q * q;
  }
  der2 = std::sqrt(der2 / n_err_) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

void Dopri5::advance(const RhsFn& f, const Eigen::Ref<const Eigen::VectorXd>& u, double t0,
                     double t1, Eigen::Ref<Eigen::VectorXd> y, double& h, IntegratorStats& stats,
                     std::vector<DenseSegment>* dense) {
  if (!(t1 > t0)) return;
  Eigen::VectorXd y0 = y;
  f(y0, u, k1_);
  ++stats.rhs_evals;
  if (!k1_.allFinite()) throw IntegrationError("non-finite right-hand side", t0);
  if (!(h > 0.0)) h = initial_step(f, u, t0, t1, y0, stats);
  h = std::min(h, cfg_.max_step);
  double t = t0;
  double facold = 1e-4;
  bool last_rejected = false;
  long steps_here = 0;
  while (t < t1) {
    if (stats.steps + stats.rejected > cfg_.max_steps)
      throw IntegrationError("maximum number of steps exceeded", t);
    bool last = false;
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw IntegrationError("step size underflow", t);
    ytmp_ = y0 + h * a21 * k1_;
    f(ytmp_, u, k2_);
    ytmp_ = y0 + h * (a31 * k1_ + a32 * k2_);
    f(ytmp_, u, k3_);
    ytmp_ = y0 + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    f(ytmp_, u, k4_);
    ytmp_ = y0 + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    f(ytmp_, u, k5_);
    ytmp_ = y0 + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    f(ytmp_, u, k6_);
    ynew_ = y0 + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    f(ynew_, u, k7_);
    stats.rhs_evals += 6;
    err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    double en = error_norm(y0, ynew_, err_);
    if (!std::isfinite(en) || !k7_.allFinite()) en = 1e10;
    const double fac11 = std::pow(en, 0.2 - kBeta * 0.75);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;
    if (en <= 1.0) {
      facold = std::max(en, 1e-4);
      ++stats.steps;
      ++steps_here;
      if (dense) {
        DenseSegment seg;
        seg.t0 = t;
        seg.h = h;
        seg.r.resize(n_, 5);
        seg.r.col(0) = y0;
        seg.r.col(1) = ynew_ - y0;
        seg.r.col(2) = h * k1_ - seg.r.col(1);
        seg.r.col(3) = seg.r.col(1) - h * k7_ - seg.r.col(2);
        seg.r.col(4) = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
        dense->push_back(std::move(seg));
      }
      y0 = ynew_;
      k1_ = k7_;
      t = last ? t1 : t + h;
      hnew = std::min(hnew, cfg_.max_step);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      ++stats.rejected;
      last_rejected = true;
      h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
    }
  }
  y = y0;
}

std::vector<double> time_grid(double t0, double tf, const InputSchedule& schedule,
                              const std::vector<double>& output_times) {
  std::vector<double> g{t0, tf};
  for (double b : schedule.breaks)
    if (b > t0 && b < tf) g.push_back(b);
  for (double b : output_times)
    if (b > t0 && b < tf) g.push_back(b);
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double v : g)
    if (out.empty() || v - out.back() > 1e-12 * std::max(1.0, std::abs(v))) out.push_back(v);
  return out;
}

Trajectory integrate(const RhsFn& f, const Eigen::VectorXd& x0, const InputSchedule& schedule,
                     double t0, double tf, const std::vector<double>& output_times,
                     const IntegratorConfig& cfg) {
  if (!(tf > t0)) throw DimensionError("integrate: empty time span");
  if (!x0.allFinite()) throw DimensionError("integrate: non-finite initial state");
  schedule.validate();
  const int n = static_cast<int>(x0.size());
  Dopri5 stepper(n, n, cfg);
  Trajectory tr;
  const auto grid = time_grid(t0, tf, schedule, output_times);
  Eigen::VectorXd y = x0;
  tr.t.push_back(grid[0]);
  tr.x.push_back(y);
  double h = 0.0;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const Eigen::VectorXd u = schedule.at(grid[g]);
    stepper.advance(f, u, grid[g], grid[g + 1], y, h, tr.stats, cfg.dense_output ? &tr.segments : nullptr);
    tr.t.push_back(grid[g + 1]);
    tr.x.push_back(y);
  }
  return tr;
}

Trajectory integrate(const galerkin::ExpandedOde& ode, const Eigen::VectorXd& x0,
                     const InputSchedule& schedule, double t0, double tf,
                     const std::vector<double>& output_times, const IntegratorConfig& cfg) {
  if (x0.size() != ode.dim()) throw DimensionError("integrate: coefficient vector size mismatch");
  auto ws = ode.make_workspace();
  RhsFn f = [&](const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& u,
                Eigen::Ref<Eigen::VectorXd> dy) { ode.rhs(y, u, dy, ws); };
  return integrate(f, x0, schedule, t0, tf, output_times, cfg);
}

Trajectory integrate(const galerkin::PolynomialOde& model, const Eigen::VectorXd& param_values,
                     const Eigen::VectorXd& x0, const InputSchedule& schedule, double t0, double tf,
                     const std::vector<double>& output_times, const IntegratorConfig& cfg) {
  if (x0.size() != model.n_states()) throw DimensionError("integrate: state size mismatch");
  RhsFn f = [&](const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& u,
                Eigen::Ref<Eigen::VectorXd> dy) { dy = model.eval(y, u, param_values); };
  return integrate(f, x0, schedule, t0, tf, output_times, cfg);
}

}  // namespace pcmpc::odeint
