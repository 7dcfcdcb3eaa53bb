#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmpc/wobench/williams_otto.hpp"

namespace pcmpc::wobench {

/// Moment trajectories on a time grid; rows are states, columns times.
struct MomentTrajectories {
  std::vector<double> times;
  Eigen::MatrixXd mean, variance, skewness, kurtosis;
  int n_draws = 0;
  int n_failed = 0;
};

/// Direct Monte Carlo on the original seven-state model: rate constants and
/// initial states drawn per draw, inputs from the schedule.
MomentTrajectories mc_reference(const WoModel& m, const odeint::InputSchedule& inputs,
                                const std::vector<double>& times, int n_draws, std::uint64_t seed,
                                const odeint::IntegratorConfig& cfg = {});

/// Same quantities from an expanded trajectory; mean and variance from the
/// coefficients, higher moments from the given samples (may be empty).
MomentTrajectories pce_moments(const galerkin::ExpandedOde& ode, const odeint::Trajectory& traj,
                               const std::vector<double>& times, int n_phys_states,
                               const polychaos::SampleMatrix* samples = nullptr);

/// time,x1_mean..,x1_var..,x1_skew..,x1_kurt.. (the shared schema).
void write_moments_csv(const std::string& path, const MomentTrajectories& m);

/// 126-point export grid (every 32 s) over [0, t_f].
std::vector<double> export_grid(double t_f, int points = 126);

}  // namespace pcmpc::wobench
