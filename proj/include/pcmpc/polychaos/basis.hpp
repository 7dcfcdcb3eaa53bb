#pragma once

#include <vector>

#include <Eigen/Core>

#include "pcmpc/polychaos/multi_index.hpp"
#include "pcmpc/polychaos/orthopoly.hpp"

namespace pcmpc::polychaos {

/// Affine map from a standard variable to its physical range.
/// Hermite: physical = a + b*xi (mean, std). Legendre: a, b are the bounds.
struct VariableMap {
  Family family = Family::Hermite;
  double a = 0.0;
  double b = 1.0;

  double to_physical(double xi) const;
};

/// Tensor-product orthogonal basis Psi_k(xi) = prod_j phi^{alpha_kj}(xi_j).
class OrthoBasis {
 public:
  OrthoBasis(MultiIndexSet indices, std::vector<VariableMap> variables);

  /// Same family for every variable, identity maps.
  static OrthoBasis uniform_family(Family f, int n_xi, int order);

  int n_xi() const { return indices_.n_xi(); }
  int order() const { return indices_.order(); }
  int size() const { return indices_.size(); }
  const MultiIndexSet& indices() const { return indices_; }
  const std::vector<VariableMap>& variables() const { return variables_; }
  Family family(int dim) const { return variables_[dim].family; }

  /// E[Psi_k^2] for every k.
  const Eigen::VectorXd& norms() const { return norms_; }

  /// Same dimension, order and families (maps may differ).
  bool same_as(const OrthoBasis& other) const;

  /// Psi(xi), entry 0 is 1.
  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& xi) const;

  /// One row of Psi values per row of xi.
  Eigen::MatrixXd eval_rows(const Eigen::Ref<const Eigen::MatrixXd>& xi) const;

  /// table(m, j) = phi_m(xi_j).
  void univariate_table(const Eigen::Ref<const Eigen::VectorXd>& xi,
                        Eigen::Ref<Eigen::MatrixXd> table) const;

 private:
  MultiIndexSet indices_;
  std::vector<VariableMap> variables_;
  Eigen::VectorXd norms_;
};

inline Eigen::VectorXd eval_basis(const OrthoBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  return basis.eval(xi);
}

}  // namespace pcmpc::polychaos
