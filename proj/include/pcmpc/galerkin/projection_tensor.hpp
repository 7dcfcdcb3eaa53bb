#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pcmpc/common/error.hpp"
#include "pcmpc/polychaos/expansion.hpp"

namespace pcmpc::galerkin {

/// Coordinate list of E[Psi_i1 ... Psi_id Psi_out] / E[Psi_out^2] over sorted
/// input tuples i1 <= ... <= id. Structural zeros are absent.
struct SparseTable {
  int degree = 0;
  std::vector<std::int32_t> inputs;  // degree entries per nonzero
  std::vector<std::int32_t> out;
  std::vector<double> value;

  std::size_t nnz() const { return value.size(); }
  std::span<const std::int32_t> tuple(std::size_t k) const {
    return {inputs.data() + k * degree, static_cast<std::size_t>(degree)};
  }
};

/// Galerkin projection integrals for products of up to `max_factors`
/// expansions. Multivariate integrals factor into univariate ones, which are
/// computed exactly by Gauss quadrature; sorted-tuple tables are materialized
/// for state degrees 1..d_max. One extra (parameter) factor is supported on
/// top of d_max through enumerate().
class ProjectionTensor {
 public:
  static constexpr double kDropThreshold = 1e-12;
  static constexpr int kMaxNodes = 256;

  ProjectionTensor(polychaos::BasisPtr basis, int d_max, bool parameter_factor = true);

  const polychaos::OrthoBasis& basis() const { return *basis_; }
  const polychaos::BasisPtr& basis_ptr() const { return basis_; }
  int d_max() const { return d_max_; }
  int max_factors() const { return max_factors_; }
  int quadrature_nodes() const { return n_nodes_; }

  /// Sorted-tuple table of state degree d (1 <= d <= d_max).
  const SparseTable& table(int d) const { return tables_.at(d - 1); }

  /// Fraction of (sorted tuple, out) coordinates that are structurally zero.
  double zero_fraction(int d) const;

  /// Direct evaluation of one entry for any factor count <= max_factors.
  double value(std::span<const int> inputs, int out) const;

  /// Calls emit(tuple, out, value) for every nonzero with tuple[s] drawn from
  /// slots[s]; tuples are ordered (no symmetry reduction).
  template <class Emit>
  void enumerate(const std::vector<std::vector<int>>& slots, Emit&& emit) const;

 private:
  struct UniEntry {
    int out;
    double value;
  };
  /// Nonzero outputs of E[prod_s phi_{m_s} phi_o] for one family and tuple code.
  const std::vector<UniEntry>& uni(int family, int k, int code) const {
    return uni_[family][k - 1][code];
  }

  template <class Emit>
  void emit_outputs(std::span<const int> tuple, Emit& emit, std::vector<int>& alpha,
                    std::vector<int>& dims, std::vector<const std::vector<UniEntry>*>& lists) const;

  void build_table(int d);

  polychaos::BasisPtr basis_;
  int d_max_;
  int max_factors_;
  int n_nodes_;
  // uni_[family][k-1][code] with code = base-(P+1) digits of (m_1..m_k).
  std::vector<std::vector<std::vector<std::vector<UniEntry>>>> uni_;
  std::vector<SparseTable> tables_;
};

/// Galerkin projection of the product of two expansions, with optional
/// Jacobians dz/da and dz/db (P~ x P~). Needs d_max >= 2.
struct ProductExpansion {
  Eigen::VectorXd z;
  Eigen::MatrixXd dz_da;
  Eigen::MatrixXd dz_db;
};
ProductExpansion multiply(const ProjectionTensor& tensor, const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b, bool jacobians = false);

/// Build tensors once per model and order (offline step).
inline ProjectionTensor build_tensors(polychaos::BasisPtr basis, int d_max,
                                      bool parameter_factor = true) {
  return ProjectionTensor(std::move(basis), d_max, parameter_factor);
}

// ---------------------------------------------------------------------------

template <class Emit>
void ProjectionTensor::emit_outputs(std::span<const int> tuple, Emit& emit, std::vector<int>& alpha,
                                    std::vector<int>& dims,
                                    std::vector<const std::vector<UniEntry>*>& lists) const {
  const auto& idx = basis_->indices();
  const int P = basis_->order();
  const int k = static_cast<int>(tuple.size());
  // Collect dimensions touched by any factor, with the per-factor orders.
  dims.clear();
  for (int s = 0; s < k; ++s)
    for (const auto& nz : idx.nonzeros(tuple[s])) {
      bool seen = false;
      for (int d : dims) seen |= (d == nz.first);
      if (!seen) dims.push_back(nz.first);
    }
  lists.resize(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    int code = 0;
    for (int s = 0; s < k; ++s) code = code * (P + 1) + idx[tuple[s]][dims[a]];
    const auto& l = uni(static_cast<int>(basis_->family(dims[a])), k, code);
    if (l.empty()) return;
    lists[a] = &l;
  }
  // Depth-first over output orders on the touched dimensions.
  const int nd = static_cast<int>(dims.size());
  std::vector<int> pick(nd, 0);
  int level = 0;
  int degree = 0;
  std::vector<double> partial(nd + 1, 1.0);
  if (nd == 0) {
    emit(tuple, 0, 1.0);
    return;
  }
  while (level >= 0) {
    if (pick[level] >= static_cast<int>(lists[level]->size())) {
      pick[level] = 0;
      --level;
      if (level >= 0) {
        degree -= (*lists[level])[pick[level]].out;
        ++pick[level];
      }
      continue;
    }
    const auto& e = (*lists[level])[pick[level]];
    if (degree + e.out > P) {
      // Entries are sorted by out, so later ones only grow the degree.
      pick[level] = static_cast<int>(lists[level]->size());
      continue;
    }
    partial[level + 1] = partial[level] * e.value;
    if (level + 1 == nd) {
      for (int a = 0; a < nd; ++a) alpha[dims[a]] = (*lists[a])[pick[a]].out;
      const int o = idx.find(alpha);
      const double v = partial[nd] / basis_->norms()[o];
      for (int a = 0; a < nd; ++a) alpha[dims[a]] = 0;
      if (std::abs(v) > kDropThreshold) emit(tuple, o, v);
      ++pick[level];
    } else {
      degree += e.out;
      ++level;
    }
  }
}

template <class Emit>
void ProjectionTensor::enumerate(const std::vector<std::vector<int>>& slots, Emit&& emit) const {
  const int k = static_cast<int>(slots.size());
  if (k < 1 || k > max_factors_)
    throw DimensionError("ProjectionTensor::enumerate: unsupported factor count");
  std::vector<int> alpha(basis_->n_xi(), 0);
  std::vector<int> dims;
  std::vector<const std::vector<UniEntry>*> lists;
  std::vector<int> tuple(k);
  std::vector<std::size_t> pos(k, 0);
  for (const auto& s : slots)
    if (s.empty()) return;
  while (true) {
    for (int s = 0; s < k; ++s) tuple[s] = slots[s][pos[s]];
    emit_outputs(std::span<const int>(tuple), emit, alpha, dims, lists);
    int s = k - 1;
    while (s >= 0 && ++pos[s] == slots[s].size()) pos[s--] = 0;
    if (s < 0) break;
  }
}

}  // namespace pcmpc::galerkin
