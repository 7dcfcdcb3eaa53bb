#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "pcmpc/galerkin/projection_tensor.hpp"
#include "pcmpc/snmpc/closed_loop.hpp"
#include "pcmpc/wobench/williams_otto.hpp"

namespace pcmpc::wobench {

/// Horizon problem settings for the Williams-Otto batch.
struct WoNmpcConfig {
  WoConfig model;
  /// Order-0 model at the parameter means with deterministic constraints.
  bool nominal = false;
  double beta = 0.98;
  double alpha = 0.01;
  int n_samples = 5000;
  std::uint64_t sample_seed = 0x5A3D1E;
  double u1_max = 0.002;
  double u2_min = 313.0;
  double u2_max = 363.0;
  double u2_rate = 1.0;  // K per sampling interval
  std::array<double, 2> initial_input{0.002, 318.0};
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  int sqp_max_iter = 40;
  double kkt_tol = 1e-5;
  int n_fresh = 10;

  nlohmann::json to_json() const;
  /// Unknown keys are rejected; "model" holds a WoConfig.
  static WoNmpcConfig from_json(const nlohmann::json& j);
};

/// Default sampling grid {0, 250, ..., 3750}, t_f = 4000.
snmpc::ClosedLoopConfig default_closed_loop();

/// Model, tensors, samples and tightening shared by every horizon.
class WoNmpc {
 public:
  explicit WoNmpc(WoNmpcConfig cfg);

  const WoNmpcConfig& config() const { return cfg_; }
  const WoModel& model() const { return model_; }
  const galerkin::ProjectionTensor& tensor() const { return *tensor_; }
  std::shared_ptr<const galerkin::ExpandedOde> ode() const { return ode_; }
  const chance::TighteningResult& tightening() const { return tight_; }
  std::shared_ptr<const polychaos::SampleMatrix> samples() const { return samples_; }

  std::vector<snmpc::ChannelSpec> channels() const;
  Eigen::VectorXd initial_input() const;

  /// Horizon OCP from a measured seven-state plant vector.
  snmpc::OcpSpec horizon(const std::vector<double>& breaks, const Eigen::VectorXd& measured,
                         const std::optional<Eigen::VectorXd>& previous_input) const;

 private:
  WoNmpcConfig cfg_;
  WoModel model_;
  std::shared_ptr<const galerkin::ProjectionTensor> tensor_;
  std::shared_ptr<const galerkin::ExpandedOde> ode_;
  chance::TighteningResult tight_;
  std::shared_ptr<const polychaos::SampleMatrix> samples_;
};

/// Rate constants of closed-loop run r, drawn from the declared laws.
std::array<double, 3> draw_plant_parameters(const WoConfig& cfg, std::uint64_t plant_seed, int run);

/// Closed-loop glue: plant draws, horizons, terminal checks and profit.
snmpc::ClosedLoopProblem make_problem(std::shared_ptr<const WoNmpc> nmpc, std::uint64_t plant_seed);

}  // namespace pcmpc::wobench
