#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace pcmpc {

/// Worker count: PCMPC_THREADS if set, else hardware concurrency.
int thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the chunk count, never on scheduling.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  int threads = thread_count());

/// Pairwise (tree) summation of term(i) for i in [begin, end). The tree shape
/// is fixed by the range, so results are reproducible bit for bit.
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
  const std::size_t n = end - begin;
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

/// Vector-valued pairwise summation; accumulate(i, acc) adds term i into acc.
template <class Accumulate>
void pairwise_sum_into(std::size_t begin, std::size_t end, Eigen::Ref<Eigen::VectorXd> out,
                       const Accumulate& accumulate) {
  const std::size_t n = end - begin;
  if (n <= 32) {
    for (std::size_t i = begin; i < end; ++i) accumulate(i, out);
    return;
  }
  const std::size_t mid = begin + n / 2;
  Eigen::VectorXd right = Eigen::VectorXd::Zero(out.size());
  pairwise_sum_into(begin, mid, out, accumulate);
  pairwise_sum_into(mid, end, right, accumulate);
  out += right;
}

}  // namespace pcmpc
