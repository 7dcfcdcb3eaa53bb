#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include <Eigen/Core>

#include "pcmpc/polychaos/basis.hpp"
#include "pcmpc/polychaos/samples.hpp"

namespace pcmpc::polychaos {

using BasisPtr = std::shared_ptr<const OrthoBasis>;

/// Truncated expansion v(xi) = coeffs' * Psi(xi).
class PCExpansion {
 public:
  PCExpansion(BasisPtr basis, Eigen::VectorXd coeffs);

  /// Constant expansion (only the index-0 coefficient set).
  static PCExpansion constant(BasisPtr basis, double value);
  /// value = mean + spread * xi_dim (affine in one standard variable).
  static PCExpansion affine(BasisPtr basis, double mean, int dim, double spread);

  const OrthoBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& xi) const;

 private:
  BasisPtr basis_;
  Eigen::VectorXd coeffs_;
};

/// out[j] = coeffs' * Psi(xi^[j]) for every sample row.
Eigen::VectorXd sample_evaluate(const PCExpansion& e, const SampleMatrix& samples);

/// Same as sample_evaluate with a precomputed Psi matrix (rows = samples).
inline Eigen::VectorXd sample_evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                       const Eigen::Ref<const Eigen::MatrixXd>& psi_rows) {
  return psi_rows * coeffs;
}

inline double mean(const PCExpansion& e) { return e.coeffs()[0]; }

/// Sum over k >= 1 of coeffs_k^2 E[Psi_k^2].
double variance(const PCExpansion& e);
double variance(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Eigen::VectorXd& norms);

/// Central moment of order m. m = 1 gives 0, m = 2 the coefficient variance,
/// m >= 3 a sample estimate over the supplied draws.
double central_moment(const PCExpansion& e, int m, const SampleMatrix& samples);

/// Sample mean/variance/skewness/excess-free kurtosis of a realization vector.
struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};
SampleMoments sample_moments(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Least-squares regression of PCE coefficients on (xi rows, values) pairs,
/// solved by column-pivoting Householder QR.
PCExpansion fit_collocation(const Eigen::Ref<const Eigen::MatrixXd>& xi_rows,
                            const Eigen::Ref<const Eigen::VectorXd>& values, BasisPtr basis);

/// Collocation fit of f over n_samples draws (default 2 * P~) from seed.
PCExpansion fit_function(const std::function<double(const Eigen::VectorXd&)>& f, BasisPtr basis,
                         int n_samples = 0, std::uint64_t seed = 0x5EEDull);

}  // namespace pcmpc::polychaos
