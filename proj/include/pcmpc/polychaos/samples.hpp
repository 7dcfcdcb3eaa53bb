#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "pcmpc/polychaos/orthopoly.hpp"

namespace pcmpc::polychaos {

/// SplitMix64; a counter-friendly 64-bit engine usable as a standard URBG.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for (seed, stream id): the basis of per-row generation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// n_samples x n_xi i.i.d. draws of the standard variables. Row r is generated
/// from its own stream derive_seed(seed, r), so any partition of the rows can
/// be produced independently and reproduces the serial result exactly.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(int n_samples, std::vector<Family> families, std::uint64_t seed);

  /// Wrap externally provided draws (no seed semantics).
  static SampleMatrix from_values(Eigen::MatrixXd values, std::vector<Family> families);

  int rows() const { return static_cast<int>(values_.rows()); }
  int n_xi() const { return static_cast<int>(values_.cols()); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Family>& families() const { return families_; }
  const Eigen::MatrixXd& values() const { return values_; }
  auto row(int r) const { return values_.row(r); }

  /// Regenerate rows [begin, end) from the seed into out (rows of out match).
  static void generate_rows(const std::vector<Family>& families, std::uint64_t seed, int begin,
                            int end, Eigen::Ref<Eigen::MatrixXd> out);

  void write_csv(std::ostream& os) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<Family> families_;
  std::uint64_t seed_ = 0;
};

}  // namespace pcmpc::polychaos
