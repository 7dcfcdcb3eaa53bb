#include "pcmpc/polychaos/basis.hpp"

#include <Eigen/Eigenvalues>

#include "pcmpc/common/error.hpp"

namespace pcmpc::polychaos {

std::string_view family_name(Family f) { return f == Family::Hermite ? "hermite" : "legendre"; }

Family family_from_name(std::string_view name) {
  if (name == "hermite" || name == "gaussian" || name == "normal") return Family::Hermite;
  if (name == "legendre" || name == "uniform") return Family::Legendre;
  throw ConfigError("unknown polynomial family '" + std::string(name) + "'");
}

GaussRule gauss_rule(Family f, int n_nodes) {
  if (n_nodes < 1) throw DimensionError("gauss_rule: need at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_nodes);
  Eigen::VectorXd off(std::max(n_nodes - 1, 0));
  for (int k = 1; k < n_nodes; ++k) {
    off[k - 1] = f == Family::Hermite ? std::sqrt(static_cast<double>(k))
                                      : k / std::sqrt(4.0 * k * k - 1.0);
  }
  GaussRule rule;
  if (n_nodes == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ConvergenceError("gauss_rule: eigen solver failed");
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  return rule;
}

OrthoBasis::OrthoBasis(MultiIndexSet indices, std::vector<VariableMap> variables)
    : indices_(std::move(indices)), variables_(std::move(variables)) {
  if (static_cast<int>(variables_.size()) != indices_.n_xi())
    throw DimensionError("OrthoBasis: one variable map per random variable required");
  norms_.resize(indices_.size());
  for (int k = 0; k < indices_.size(); ++k) {
    double n = 1.0;
    for (auto [dim, ord] : indices_.nonzeros(k)) n *= norm_squared(variables_[dim].family, ord);
    norms_[k] = n;
  }
}

OrthoBasis OrthoBasis::uniform_family(Family f, int n_xi, int order) {
  std::vector<VariableMap> vars(n_xi, VariableMap{f, 0.0, 1.0});
  if (f == Family::Legendre)
    for (auto& v : vars) {
      v.a = -1.0;
      v.b = 1.0;
    }
  return OrthoBasis(MultiIndexSet(n_xi, order), std::move(vars));
}

double VariableMap::to_physical(double xi) const {
  if (family == Family::Hermite) return a + b * xi;
  return 0.5 * (a + b) + 0.5 * (b - a) * xi;
}

bool OrthoBasis::same_as(const OrthoBasis& other) const {
  if (this == &other) return true;
  if (n_xi() != other.n_xi() || order() != other.order()) return false;
  for (int j = 0; j < n_xi(); ++j)
    if (variables_[j].family != other.variables_[j].family) return false;
  return true;
}

void OrthoBasis::univariate_table(const Eigen::Ref<const Eigen::VectorXd>& xi,
                                  Eigen::Ref<Eigen::MatrixXd> table) const {
  const int P = order();
  for (int j = 0; j < n_xi(); ++j) eval_polys(variables_[j].family, P, xi[j], table.col(j));
}

Eigen::VectorXd OrthoBasis::eval(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  if (xi.size() != n_xi()) throw DimensionError("eval_basis: point dimension mismatch");
  Eigen::MatrixXd table(order() + 1, n_xi());
  univariate_table(xi, table);
  Eigen::VectorXd psi(size());
  for (int k = 0; k < size(); ++k) {
    double v = 1.0;
    for (auto [dim, ord] : indices_.nonzeros(k)) v *= table(ord, dim);
    psi[k] = v;
  }
  return psi;
}

Eigen::MatrixXd OrthoBasis::eval_rows(const Eigen::Ref<const Eigen::MatrixXd>& xi) const {
  if (xi.cols() != n_xi()) throw DimensionError("eval_basis: sample dimension mismatch");
  Eigen::MatrixXd psi(xi.rows(), size());
  Eigen::MatrixXd table(order() + 1, n_xi());
  for (Eigen::Index r = 0; r < xi.rows(); ++r) {
    univariate_table(xi.row(r).transpose(), table);
    for (int k = 0; k < size(); ++k) {
      double v = 1.0;
      for (auto [dim, ord] : indices_.nonzeros(k)) v *= table(ord, dim);
      psi(r, k) = v;
    }
  }
  return psi;
}

}  // namespace pcmpc::polychaos
