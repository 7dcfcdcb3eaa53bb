#include "pcmpc/chance/tightening.hpp"

#include <cmath>
#include <string>

#include "pcmpc/chance/beta.hpp"
#include "pcmpc/common/error.hpp"

namespace pcmpc::chance {

double lower_confidence_bound(int n_success, int n, double alpha) {
  if (n < 1 || n_success < 0 || n_success > n) throw DimensionError("lower_confidence_bound: bad counts");
  if (n_success == 0) return 0.0;
  return 1.0 - beta_inv_cdf(1.0 - alpha / 2.0, n + 1.0 - n_success, n_success);
}

TighteningResult tighten(double beta, double alpha, int n_samples) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("tighten: beta must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("tighten: alpha must lie in (0,1)");
  if (n_samples < 1) throw ConfigError("tighten: need at least one sample");
  TighteningResult r;
  r.beta = beta;
  r.alpha = alpha;
  r.n_samples = n_samples;
  int k = static_cast<int>(std::ceil(beta * n_samples - 1e-9));
  if (k < 1) k = 1;
  for (; k <= n_samples; ++k) {
    const double lb = lower_confidence_bound(k, n_samples, alpha);
    if (lb >= beta) {
      r.k = k;
      r.beta_cor = static_cast<double>(k) / n_samples;
      r.lower_bound_at_beta_cor = lb;
      return r;
    }
  }
  throw InfeasibleError("tighten: no tightening reaches beta=" + std::to_string(beta) +
                        " with N_S=" + std::to_string(n_samples));
}

std::vector<TighteningResult> tightening_curve(double beta, double alpha, int n_from, int n_to) {
  if (n_from < 1 || n_to < n_from) throw ConfigError("tightening_curve: bad sample-size range");
  std::vector<TighteningResult> out;
  out.reserve(n_to - n_from + 1);
  for (int n = n_from; n <= n_to; ++n) out.push_back(tighten(beta, alpha, n));
  return out;
}

}  // namespace pcmpc::chance
