#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pcmpc::polychaos {

/// Total-degree truncated multi-index set over n_xi variables, graded
/// lexicographic order: by total degree, then by descending leading component.
/// Index 0 is always the zero multi-index.
class MultiIndexSet {
 public:
  MultiIndexSet(int n_xi, int order);

  int n_xi() const { return n_xi_; }
  int order() const { return order_; }
  int size() const { return size_; }

  /// Component view of multi-index k.
  std::span<const int> operator[](int k) const {
    return {data_.data() + static_cast<std::size_t>(k) * n_xi_, static_cast<std::size_t>(n_xi_)};
  }
  int total_degree(int k) const { return degree_[k]; }

  /// Nonzero components of index k as (dimension, order) pairs.
  std::span<const std::pair<int, int>> nonzeros(int k) const {
    return {nz_.data() + nz_offset_[k], nz_offset_[k + 1] - nz_offset_[k]};
  }

  /// Position of a multi-index, or -1 when it is not part of the set.
  int find(std::span<const int> alpha) const;

 private:
  static std::string key(std::span<const int> alpha);

  int n_xi_;
  int order_;
  int size_;
  std::vector<int> data_;
  std::vector<int> degree_;
  std::vector<std::pair<int, int>> nz_;
  std::vector<std::size_t> nz_offset_;
  std::unordered_map<std::string, int> lookup_;
};

/// (n + k choose k) with overflow detection; throws SizeError past int range.
int binomial_count(int n, int k);

/// Build the total-degree set of size (n_xi + order choose order).
inline MultiIndexSet build_index_set(int n_xi, int order) { return MultiIndexSet(n_xi, order); }

}  // namespace pcmpc::polychaos
