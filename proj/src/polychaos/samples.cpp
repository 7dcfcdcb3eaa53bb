#include "pcmpc/polychaos/samples.hpp"

#include <iomanip>
#include <ostream>
#include <random>

#include "pcmpc/common/error.hpp"
#include "pcmpc/common/parallel.hpp"

namespace pcmpc::polychaos {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 a(seed ^ 0xD1B54A32D192ED03ull);
  const std::uint64_t base = a();
  SplitMix64 b(base + 0x9E3779B97F4A7C15ull * (stream + 1));
  return b();
}

SampleMatrix::SampleMatrix(int n_samples, std::vector<Family> families, std::uint64_t seed)
    : families_(std::move(families)), seed_(seed) {
  if (n_samples < 0) throw DimensionError("SampleMatrix: negative sample count");
  values_.resize(n_samples, static_cast<Eigen::Index>(families_.size()));
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t b, std::size_t e) {
    generate_rows(families_, seed_, static_cast<int>(b), static_cast<int>(e),
                  values_.middleRows(b, e - b));
  });
}

SampleMatrix SampleMatrix::from_values(Eigen::MatrixXd values, std::vector<Family> families) {
  if (values.cols() != static_cast<Eigen::Index>(families.size()))
    throw DimensionError("SampleMatrix: column count differs from family count");
  SampleMatrix s;
  s.values_ = std::move(values);
  s.families_ = std::move(families);
  return s;
}

void SampleMatrix::generate_rows(const std::vector<Family>& families, std::uint64_t seed, int begin,
                                 int end, Eigen::Ref<Eigen::MatrixXd> out) {
  for (int r = begin; r < end; ++r) {
    SplitMix64 eng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (std::size_t j = 0; j < families.size(); ++j)
      out(r - begin, static_cast<Eigen::Index>(j)) =
          families[j] == Family::Hermite ? normal(eng) : uniform(eng);
  }
}

void SampleMatrix::write_csv(std::ostream& os) const {
  os << std::setprecision(17);
  for (int j = 0; j < n_xi(); ++j) os << (j ? "," : "") << "xi" << (j + 1);
  os << '\n';
  for (int r = 0; r < rows(); ++r) {
    for (int j = 0; j < n_xi(); ++j) os << (j ? "," : "") << values_(r, j);
    os << '\n';
  }
}

}  // namespace pcmpc::polychaos
