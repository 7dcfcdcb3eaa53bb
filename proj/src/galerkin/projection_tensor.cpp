#include "pcmpc/galerkin/projection_tensor.hpp"

#include <algorithm>
#include <mutex>

#include "pcmpc/common/parallel.hpp"

namespace pcmpc::galerkin {

using polychaos::Family;

ProjectionTensor::ProjectionTensor(polychaos::BasisPtr basis, int d_max, bool parameter_factor)
    : basis_(std::move(basis)), d_max_(d_max) {
  if (!basis_) throw DimensionError("ProjectionTensor: null basis");
  if (d_max < 1) throw DimensionError("ProjectionTensor: d_max must be >= 1");
  const int P = basis_->order();
  max_factors_ = d_max + (parameter_factor ? 1 : 0);
  // Integrand degree is at most (max_factors + 1) * P.
  n_nodes_ = ((max_factors_ + 1) * P + 1 + 1) / 2;
  if (n_nodes_ < 1) n_nodes_ = 1;
  if (n_nodes_ > kMaxNodes) throw SizeError("ProjectionTensor: quadrature node count overflow");
  double codes = 1.0;
  for (int k = 0; k < max_factors_; ++k) codes *= (P + 1);
  if (codes > 5e6) throw SizeError("ProjectionTensor: univariate table too large");

  uni_.resize(2);
  for (int fam = 0; fam < 2; ++fam) {
    const Family f = static_cast<Family>(fam);
    bool used = false;
    for (int j = 0; j < basis_->n_xi(); ++j) used |= basis_->family(j) == f;
    if (!used) continue;
    const auto rule = polychaos::gauss_rule(f, n_nodes_);
    Eigen::MatrixXd phi(P + 1, n_nodes_);
    for (int q = 0; q < n_nodes_; ++q) polychaos::eval_polys(f, P, rule.nodes[q], phi.col(q));
    uni_[fam].resize(max_factors_);
    for (int k = 1; k <= max_factors_; ++k) {
      int n_codes = 1;
      for (int s = 0; s < k; ++s) n_codes *= (P + 1);
      auto& lists = uni_[fam][k - 1];
      lists.resize(n_codes);
      std::vector<int> m(k);
      Eigen::VectorXd prod(n_nodes_);
      for (int code = 0; code < n_codes; ++code) {
        int c = code, sum = 0;
        for (int s = k - 1; s >= 0; --s) {
          m[s] = c % (P + 1);
          c /= (P + 1);
          sum += m[s];
        }
        prod.setOnes();
        for (int s = 0; s < k; ++s) prod.array() *= phi.row(m[s]).transpose().array();
        const double scale =
            std::sqrt(std::max(1.0, (rule.weights.array() * prod.array().square()).sum()));
        for (int o = 0; o <= std::min(P, sum); ++o) {
          if ((sum + o) % 2 != 0) continue;  // both families are symmetric
          double v = 0.0;
          for (int q = 0; q < n_nodes_; ++q) v += rule.weights[q] * prod[q] * phi(o, q);
          if (std::abs(v) > kDropThreshold * scale * std::sqrt(polychaos::norm_squared(f, o)))
            lists[code].push_back({o, v});
        }
      }
    }
  }
  for (int d = 1; d <= d_max_; ++d) build_table(d);
}

void ProjectionTensor::build_table(int d) {
  const int n = basis_->size();
  SparseTable table;
  table.degree = d;
  // Chunk over the leading index; chunks are merged in order.
  std::vector<SparseTable> parts(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    std::vector<int> alpha(basis_->n_xi(), 0), dims;
    std::vector<const std::vector<UniEntry>*> lists;
    std::vector<int> tuple(d);
    for (std::size_t first = b; first < e; ++first) {
      SparseTable& part = parts[first];
      auto emit = [&](std::span<const int> t, int o, double v) {
        part.inputs.insert(part.inputs.end(), t.begin(), t.end());
        part.out.push_back(o);
        part.value.push_back(v);
      };
      tuple[0] = static_cast<int>(first);
      for (int s = 1; s < d; ++s) tuple[s] = tuple[0];
      while (true) {
        emit_outputs(std::span<const int>(tuple), emit, alpha, dims, lists);
        int s = d - 1;
        while (s >= 1 && ++tuple[s] == n) --s;
        if (s < 1) break;
        for (int r = s + 1; r < d; ++r) tuple[r] = tuple[s];
      }
    }
  });
  for (auto& p : parts) {
    table.inputs.insert(table.inputs.end(), p.inputs.begin(), p.inputs.end());
    table.out.insert(table.out.end(), p.out.begin(), p.out.end());
    table.value.insert(table.value.end(), p.value.begin(), p.value.end());
  }
  tables_.push_back(std::move(table));
}

double ProjectionTensor::zero_fraction(int d) const {
  // Sorted d-tuples over n indices: C(n + d - 1, d).
  const double n = basis_->size();
  double tuples = 1.0;
  for (int s = 0; s < d; ++s) tuples = tuples * (n + s) / (s + 1);
  return 1.0 - static_cast<double>(table(d).nnz()) / (tuples * n);
}

double ProjectionTensor::value(std::span<const int> inputs, int out) const {
  const int k = static_cast<int>(inputs.size());
  if (k < 1 || k > max_factors_) throw DimensionError("ProjectionTensor::value: unsupported factor count");
  const auto& idx = basis_->indices();
  const int P = basis_->order();
  auto ao = idx[out];
  double v = 1.0;
  for (int j = 0; j < basis_->n_xi(); ++j) {
    int code = 0;
    bool trivial = ao[j] == 0;
    for (int s = 0; s < k; ++s) {
      code = code * (P + 1) + idx[inputs[s]][j];
      trivial &= idx[inputs[s]][j] == 0;
    }
    if (trivial) continue;
    const auto& l = uni(static_cast<int>(basis_->family(j)), k, code);
    auto it = std::find_if(l.begin(), l.end(), [&](const UniEntry& e) { return e.out == ao[j]; });
    if (it == l.end()) return 0.0;
    v *= it->value;
  }
  return v / basis_->norms()[out];
}

ProductExpansion multiply(const ProjectionTensor& tensor, const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b, bool jacobians) {
  const int n = tensor.basis().size();
  if (a.size() != n || b.size() != n) throw DimensionError("multiply: coefficient size mismatch");
  if (tensor.d_max() < 2) throw DimensionError("multiply: tensor needs degree 2");
  const SparseTable& T = tensor.table(2);
  ProductExpansion r;
  r.z = Eigen::VectorXd::Zero(n);
  if (jacobians) {
    r.dz_da = Eigen::MatrixXd::Zero(n, n);
    r.dz_db = Eigen::MatrixXd::Zero(n, n);
  }
  for (std::size_t e = 0; e < T.nnz(); ++e) {
    const int i = T.inputs[2 * e], j = T.inputs[2 * e + 1], o = T.out[e];
    const double v = T.value[e];
    if (i == j) {
      r.z[o] += v * a[i] * b[i];
      if (jacobians) {
        r.dz_da(o, i) += v * b[i];
        r.dz_db(o, i) += v * a[i];
      }
    } else {
      r.z[o] += v * (a[i] * b[j] + a[j] * b[i]);
      if (jacobians) {
        r.dz_da(o, i) += v * b[j];
        r.dz_da(o, j) += v * b[i];
        r.dz_db(o, j) += v * a[i];
        r.dz_db(o, i) += v * a[j];
      }
    }
  }
  return r;
}

}  // namespace pcmpc::galerkin
