#include "pcmpc/chance/satisfaction.hpp"

#include <sstream>

#include "pcmpc/common/error.hpp"
#include "pcmpc/common/parallel.hpp"

namespace pcmpc::chance {

bool indicator(const ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
               const Eigen::Ref<const Eigen::VectorXd>& xi) {
  return (cs.eval(X, xi).array() <= 0.0).all();
}

SatisfactionEstimate estimate_probability_rows(const ConstraintSet& cs,
                                               const std::vector<Eigen::VectorXd>& X,
                                               const Eigen::Ref<const Eigen::MatrixXd>& psi_rows) {
  if (psi_rows.rows() < 1) throw DimensionError("estimate_probability: no samples");
  const Eigen::MatrixXd G = cs.eval_rows(X, psi_rows);
  SatisfactionEstimate e;
  e.n_samples = static_cast<int>(G.rows());
  for (Eigen::Index r = 0; r < G.rows(); ++r) e.n_satisfied += (G.row(r).array() <= 0.0).all() ? 1 : 0;
  e.p_hat = static_cast<double>(e.n_satisfied) / e.n_samples;
  return e;
}

SatisfactionEstimate estimate_probability(const ConstraintSet& cs,
                                          const std::vector<Eigen::VectorXd>& X,
                                          const polychaos::SampleMatrix& samples) {
  if (samples.rows() < 1) throw DimensionError("estimate_probability: no samples");
  if (samples.n_xi() != cs.basis().n_xi()) throw DimensionError("estimate_probability: sample dimension");
  cs.check(X);
  const int n = samples.rows();
  std::vector<int> hits(n, 0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    const Eigen::MatrixXd psi = cs.basis().eval_rows(samples.values().middleRows(b, e - b));
    const Eigen::MatrixXd G = cs.eval_rows(X, psi);
    for (Eigen::Index r = 0; r < G.rows(); ++r) hits[b + r] = (G.row(r).array() <= 0.0).all() ? 1 : 0;
  });
  SatisfactionEstimate est;
  est.n_samples = n;
  for (int h : hits) est.n_satisfied += h;
  est.p_hat = static_cast<double>(est.n_satisfied) / n;
  return est;
}

FeasibilityReport feasibility_report(const ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
                                     const TighteningResult& tight,
                                     const polychaos::SampleMatrix& samples,
                                     std::uint64_t fresh_seed, int n_fresh) {
  FeasibilityReport rep;
  rep.tightening = tight;
  rep.confidence = 1.0 - tight.alpha;
  const auto est = estimate_probability(cs, X, samples);
  rep.p_hat = est.p_hat;
  rep.sampled_feasible = est.n_satisfied >= tight.k;
  int good = 0;
  for (int s = 0; s < n_fresh; ++s) {
    polychaos::SampleMatrix fresh(samples.rows(), samples.families(),
                                  polychaos::derive_seed(fresh_seed, static_cast<std::uint64_t>(s)));
    const double p = estimate_probability(cs, X, fresh).p_hat;
    rep.fresh_p_hat.push_back(p);
    good += p >= tight.beta ? 1 : 0;
  }
  rep.fresh_fraction_at_beta = n_fresh > 0 ? static_cast<double>(good) / n_fresh : 0.0;
  std::ostringstream os;
  if (rep.sampled_feasible)
    os << "feasible with confidence >= " << rep.confidence << " (p_hat=" << rep.p_hat
       << " >= beta_cor=" << tight.beta_cor << ")";
  else
    os << "tightened constraint violated (p_hat=" << rep.p_hat << " < beta_cor=" << tight.beta_cor << ")";
  rep.message = os.str();
  return rep;
}

}  // namespace pcmpc::chance
