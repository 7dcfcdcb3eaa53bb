#include "pcmpc/wobench/monte_carlo.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "pcmpc/common/error.hpp"
#include "pcmpc/common/parallel.hpp"
#include "pcmpc/polychaos/samples.hpp"

namespace pcmpc::wobench {

namespace {

MomentTrajectories allocate(const std::vector<double>& times, int states) {
  MomentTrajectories m;
  m.times = times;
  const Eigen::Index T = static_cast<Eigen::Index>(times.size());
  m.mean = Eigen::MatrixXd::Zero(states, T);
  m.variance = Eigen::MatrixXd::Zero(states, T);
  m.skewness = Eigen::MatrixXd::Zero(states, T);
  m.kurtosis = Eigen::MatrixXd::Zero(states, T);
  return m;
}

}  // namespace

MomentTrajectories mc_reference(const WoModel& m, const odeint::InputSchedule& inputs,
                                const std::vector<double>& times, int n_draws, std::uint64_t seed,
                                const odeint::IntegratorConfig& cfg) {
  if (n_draws < 1) throw ConfigError("mc_reference: need at least one draw");
  const auto sd = m.cfg.k_sd();
  const polychaos::SampleMatrix xi(n_draws, std::vector<polychaos::Family>(kNxi, polychaos::Family::Hermite), seed);
  const double t0 = times.front(), tf = times.back();
  const int T = static_cast<int>(times.size());
  // values[d] is kPhysStates x T, empty when the draw failed.
  std::vector<Eigen::MatrixXd> values(n_draws);
  parallel_for(n_draws, [&](std::size_t b, std::size_t e) {
    for (std::size_t d = b; d < e; ++d) {
      std::array<double, 3> k;
      for (int i = 0; i < 3; ++i) k[i] = m.cfg.k_mean[i] + sd[i] * xi.values()(d, i);
      Eigen::VectorXd x0(kPhysStates);
      for (int l = 0; l < kPhysStates; ++l) {
        const double s = m.cfg.ic_noise_at_t0 ? m.cfg.ic_rel_sd * std::abs(m.cfg.x0[l]) : 0.0;
        x0[l] = m.cfg.x0[l] + s * xi.values()(d, kParams + l);
      }
      try {
        const auto tr = odeint::integrate(plant_rhs(k, m.cfg), x0, inputs, t0, tf, times, cfg);
        Eigen::MatrixXd v(kPhysStates, T);
        for (int t = 0; t < T; ++t) v.col(t) = tr.at(times[t]);
        values[d] = std::move(v);
      } catch (const IntegrationError&) {
      }
    }
  });
  MomentTrajectories out = allocate(times, kPhysStates);
  out.n_draws = n_draws;
  std::vector<int> ok;
  for (int d = 0; d < n_draws; ++d) {
    if (values[d].size())
      ok.push_back(d);
    else
      ++out.n_failed;
  }
  if (ok.empty()) throw IntegrationError("mc_reference: every draw failed", t0);
  Eigen::VectorXd col(ok.size());
  for (int l = 0; l < kPhysStates; ++l)
    for (int t = 0; t < T; ++t) {
      for (std::size_t q = 0; q < ok.size(); ++q) col[q] = values[ok[q]](l, t);
      const auto mo = polychaos::sample_moments(col);
      out.mean(l, t) = mo.mean;
      out.variance(l, t) = mo.variance;
      out.skewness(l, t) = mo.skewness;
      out.kurtosis(l, t) = mo.kurtosis;
    }
  return out;
}

MomentTrajectories pce_moments(const galerkin::ExpandedOde& ode, const odeint::Trajectory& traj,
                               const std::vector<double>& times, int n_phys_states,
                               const polychaos::SampleMatrix* samples) {
  MomentTrajectories out = allocate(times, n_phys_states);
  const int n = ode.n_terms();
  const auto& norms = ode.basis().norms();
  Eigen::MatrixXd psi;
  if (samples) psi = ode.basis().eval_rows(samples->values());
  for (std::size_t t = 0; t < times.size(); ++t) {
    const Eigen::VectorXd x = traj.at(times[t]);
    for (int l = 0; l < n_phys_states; ++l) {
      const auto c = x.segment(static_cast<Eigen::Index>(l) * n, n);
      out.mean(l, t) = c[0];
      out.variance(l, t) = polychaos::variance(c, norms);
      if (samples) {
        const auto mo = polychaos::sample_moments(psi * c);
        out.skewness(l, t) = mo.skewness;
        out.kurtosis(l, t) = mo.kurtosis;
      }
    }
  }
  if (samples) out.n_draws = samples->rows();
  return out;
}

void write_moments_csv(const std::string& path, const MomentTrajectories& m) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  const int ns = static_cast<int>(m.mean.rows());
  os << "time";
  for (const char* tag : {"mean", "var", "skew", "kurt"})
    for (int l = 0; l < ns; ++l) os << ",x" << l + 1 << '_' << tag;
  os << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < m.times.size(); ++t) {
    os << m.times[t];
    for (const auto* M : {&m.mean, &m.variance, &m.skewness, &m.kurtosis})
      for (int l = 0; l < ns; ++l) os << ',' << (*M)(l, t);
    os << '\n';
  }
}

std::vector<double> export_grid(double t_f, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = t_f * i / (points - 1);
  return g;
}

}  // namespace pcmpc::wobench
