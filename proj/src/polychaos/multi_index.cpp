#include "pcmpc/polychaos/multi_index.hpp"

#include <limits>

#include "pcmpc/common/error.hpp"

namespace pcmpc::polychaos {

int binomial_count(int n, int k) {
  if (n < 0 || k < 0) throw DimensionError("binomial_count: negative argument");
  // C(n+k, k) built incrementally; each partial product is itself a binomial.
  unsigned long long c = 1;
  for (int i = 1; i <= k; ++i) {
    const unsigned long long num = static_cast<unsigned long long>(n) + i;
    if (c > std::numeric_limits<unsigned long long>::max() / num)
      throw SizeError("multi-index set cardinality overflows");
    c = c * num / i;
    if (c > static_cast<unsigned long long>(std::numeric_limits<int>::max()))
      throw SizeError("multi-index set cardinality exceeds the supported index range");
  }
  return static_cast<int>(c);
}

namespace {

void generate(int dim, int n_xi, int remaining, std::vector<int>& current, std::vector<int>& out) {
  if (dim == n_xi - 1) {
    current[dim] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[dim] = v;
    generate(dim + 1, n_xi, remaining - v, current, out);
  }
}

}  // namespace

MultiIndexSet::MultiIndexSet(int n_xi, int order) : n_xi_(n_xi), order_(order) {
  if (n_xi < 1) throw DimensionError("MultiIndexSet: need at least one random variable");
  if (order < 0) throw DimensionError("MultiIndexSet: negative order");
  size_ = binomial_count(n_xi, order);
  if (static_cast<long long>(size_) * n_xi > std::numeric_limits<int>::max())
    throw SizeError("MultiIndexSet: storage exceeds the supported index range");

  data_.reserve(static_cast<std::size_t>(size_) * n_xi);
  std::vector<int> current(n_xi, 0);
  for (int d = 0; d <= order; ++d) generate(0, n_xi, d, current, data_);

  degree_.resize(size_);
  nz_offset_.assign(size_ + 1, 0);
  lookup_.reserve(size_);
  for (int k = 0; k < size_; ++k) {
    auto alpha = (*this)[k];
    int deg = 0;
    for (int j = 0; j < n_xi_; ++j) {
      deg += alpha[j];
      if (alpha[j] != 0) nz_.emplace_back(j, alpha[j]);
    }
    degree_[k] = deg;
    nz_offset_[k + 1] = nz_.size();
    lookup_.emplace(key(alpha), k);
  }
}

std::string MultiIndexSet::key(std::span<const int> alpha) {
  std::string s(alpha.size(), '\0');
  for (std::size_t j = 0; j < alpha.size(); ++j) s[j] = static_cast<char>(alpha[j]);
  return s;
}

int MultiIndexSet::find(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != n_xi_) return -1;
  int deg = 0;
  for (int a : alpha) {
    if (a < 0) return -1;
    deg += a;
  }
  if (deg > order_) return -1;
  auto it = lookup_.find(key(alpha));
  return it == lookup_.end() ? -1 : it->second;
}

}  // namespace pcmpc::polychaos
