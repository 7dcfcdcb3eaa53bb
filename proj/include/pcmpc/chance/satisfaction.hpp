#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcmpc/chance/constraint_set.hpp"
#include "pcmpc/chance/tightening.hpp"
#include "pcmpc/polychaos/samples.hpp"

namespace pcmpc::chance {

struct SatisfactionEstimate {
  double p_hat = 0.0;
  int n_samples = 0;
  int n_satisfied = 0;
};

/// 1 when every g_i <= 0.
bool indicator(const ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
               const Eigen::Ref<const Eigen::VectorXd>& xi);

/// Sample average of the indicator.
SatisfactionEstimate estimate_probability(const ConstraintSet& cs,
                                          const std::vector<Eigen::VectorXd>& X,
                                          const polychaos::SampleMatrix& samples);
SatisfactionEstimate estimate_probability_rows(const ConstraintSet& cs,
                                               const std::vector<Eigen::VectorXd>& X,
                                               const Eigen::Ref<const Eigen::MatrixXd>& psi_rows);

struct FeasibilityReport {
  bool sampled_feasible = false;  // p_hat >= beta_cor
  double p_hat = 0.0;
  double confidence = 0.0;        // 1 - alpha
  TighteningResult tightening;
  std::vector<double> fresh_p_hat;
  double fresh_fraction_at_beta = 0.0;
  std::string message;
};

/// Sampled-feasibility statement at beta_cor, plus revalidation on
/// n_fresh independent sample sets derived from fresh_seed.
FeasibilityReport feasibility_report(const ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
                                     const TighteningResult& tight,
                                     const polychaos::SampleMatrix& samples,
                                     std::uint64_t fresh_seed, int n_fresh = 10);

}  // namespace pcmpc::chance
