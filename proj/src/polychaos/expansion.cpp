#include "pcmpc/polychaos/expansion.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "pcmpc/common/error.hpp"

namespace pcmpc::polychaos {

PCExpansion::PCExpansion(BasisPtr basis, Eigen::VectorXd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (!basis_) throw DimensionError("PCExpansion: null basis");
  if (coeffs_.size() != basis_->size())
    throw DimensionError("PCExpansion: coefficient count differs from basis cardinality");
  if (!coeffs_.allFinite()) throw DimensionError("PCExpansion: non-finite coefficient");
}

PCExpansion PCExpansion::constant(BasisPtr basis, double value) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis->size());
  c[0] = value;
  return PCExpansion(std::move(basis), std::move(c));
}

PCExpansion PCExpansion::affine(BasisPtr basis, double mean, int dim, double spread) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis->size());
  c[0] = mean;
  if (spread != 0.0) {
    if (basis->order() < 1) throw DimensionError("PCExpansion::affine: order 0 basis");
    std::vector<int> alpha(basis->n_xi(), 0);
    alpha.at(dim) = 1;
    c[basis->indices().find(alpha)] = spread;
  }
  return PCExpansion(std::move(basis), std::move(c));
}

double PCExpansion::operator()(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  return coeffs_.dot(basis_->eval(xi));
}

Eigen::VectorXd sample_evaluate(const PCExpansion& e, const SampleMatrix& samples) {
  if (samples.n_xi() != e.basis().n_xi())
    throw DimensionError("sample_evaluate: sample dimension differs from basis dimension");
  return e.basis().eval_rows(samples.values()) * e.coeffs();
}

double variance(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Eigen::VectorXd& norms) {
  const auto n = coeffs.size() - 1;
  return (coeffs.tail(n).array().square() * norms.tail(n).array()).sum();
}

double variance(const PCExpansion& e) { return variance(e.coeffs(), e.basis().norms()); }

double central_moment(const PCExpansion& e, int m, const SampleMatrix& samples) {
  if (m < 1) throw DimensionError("central_moment: order must be >= 1");
  if (m == 1) return 0.0;
  if (m == 2) return variance(e);
  const Eigen::VectorXd v = sample_evaluate(e, samples);
  const double mu = mean(e);
  return (v.array() - mu).pow(m).mean();
}

SampleMoments sample_moments(const Eigen::Ref<const Eigen::VectorXd>& values) {
  SampleMoments m;
  const double n = static_cast<double>(values.size());
  if (n == 0) return m;
  m.mean = values.mean();
  const Eigen::ArrayXd d = values.array() - m.mean;
  const double m2 = d.square().sum() / n;
  m.variance = n > 1 ? d.square().sum() / (n - 1) : 0.0;
  if (m2 > 0) {
    m.skewness = (d.cube().sum() / n) / std::pow(m2, 1.5);
    m.kurtosis = (d.square().square().sum() / n) / (m2 * m2);
  }
  return m;
}

PCExpansion fit_collocation(const Eigen::Ref<const Eigen::MatrixXd>& xi_rows,
                            const Eigen::Ref<const Eigen::VectorXd>& values, BasisPtr basis) {
  if (xi_rows.rows() != values.size())
    throw DimensionError("fit_collocation: sample and value counts differ");
  if (xi_rows.rows() < basis->size())
    throw SingularityError("fit_collocation: fewer evaluations than basis terms");
  const Eigen::MatrixXd A = basis->eval_rows(xi_rows);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < A.cols()) {
    std::ostringstream msg;
    msg << "fit_collocation: regression matrix rank " << qr.rank() << " < " << A.cols()
        << "; deficient columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < A.cols(); ++k) msg << ' ' << perm[k];
    throw SingularityError(msg.str());
  }
  return PCExpansion(std::move(basis), qr.solve(values));
}

PCExpansion fit_function(const std::function<double(const Eigen::VectorXd&)>& f, BasisPtr basis,
                         int n_samples, std::uint64_t seed) {
  if (n_samples <= 0) n_samples = 2 * basis->size();
  std::vector<Family> fam;
  for (const auto& v : basis->variables()) fam.push_back(v.family);
  SampleMatrix s(n_samples, fam, seed);
  Eigen::VectorXd vals(n_samples);
  for (int r = 0; r < n_samples; ++r) vals[r] = f(s.values().row(r).transpose());
  return fit_collocation(s.values(), vals, std::move(basis));
}

}  // namespace pcmpc::polychaos
