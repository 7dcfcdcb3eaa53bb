#pragma once

#include <vector>

namespace pcmpc::chance {

struct TighteningResult {
  double beta = 0.0;
  double alpha = 0.0;
  int n_samples = 0;
  int k = 0;              // floor(beta_cor * N_S)
  double beta_cor = 0.0;  // k / N_S
  double lower_bound_at_beta_cor = 0.0;
};

/// Lower confidence bound on a success probability after observing
/// n_success of n trials: 1 - betainv(1 - alpha/2, n + 1 - n_success, n_success).
double lower_confidence_bound(int n_success, int n, double alpha);

/// Smallest k / N_S whose lower confidence bound reaches beta, scanning k
/// upward from ceil(beta * N_S). Throws InfeasibleError when k = N_S fails.
TighteningResult tighten(double beta, double alpha, int n_samples);

/// tighten() for every N_S in [n_from, n_to].
std::vector<TighteningResult> tightening_curve(double beta, double alpha, int n_from, int n_to);

}  // namespace pcmpc::chance
