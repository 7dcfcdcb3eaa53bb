#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmpc/ccgrad/polynomial.hpp"
#include "pcmpc/chance/constraint_set.hpp"
#include "pcmpc/polychaos/samples.hpp"

namespace pcmpc::ccgrad {

struct GradConfig {
  int slice_var = 0;  // distinguished random variable
  double root_tol = 1e-10;
  double dedup_tol = 1e-8;
  std::string dump_path;  // per-sample integration limits as CSV when set
};

/// Sorted integration limits of one sample along the slice variable. Entry 0
/// and the last entry are the support bounds; owner[i] is the constraint
/// solved by limits[i] (-1 for the bounds).
struct RootVector {
  std::vector<double> limits;
  std::vector<int> owner;
};

/// Slice of every constraint along the slice variable at the other
/// components of one sample.
class SliceBuilder {
 public:
  SliceBuilder(const chance::ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X, int slice_var);

  /// One polynomial per constraint at sample xi (the slice entry is ignored).
  std::vector<Polynomial> slices(const Eigen::Ref<const Eigen::VectorXd>& xi) const;
  /// g_i(t) evaluated directly from the expansion, for checks.
  double direct(int i, const Eigen::Ref<const Eigen::VectorXd>& xi, double t) const;

  int degree(int i) const;

 private:
  const chance::ConstraintSet& cs_;
  const std::vector<Eigen::VectorXd>& X_;
  int v_;
};

/// Single-constraint convenience wrapper.
Polynomial univariate_slice(const chance::ConstraintSet& cs, int i,
                            const std::vector<Eigen::VectorXd>& X,
                            const Eigen::Ref<const Eigen::VectorXd>& xi, int slice_var = 0);

/// Merge the real roots of all slice polynomials into a RootVector, or
/// nullopt (with reason) when the sample must be discarded.
std::optional<RootVector> find_integration_limits(const std::vector<Polynomial>& slices,
                                                  double lower, double upper,
                                                  const GradConfig& cfg = {},
                                                  std::string* reason = nullptr);

struct GradResult {
  std::vector<Eigen::VectorXd> dP_dX;      // layout of X
  std::vector<Eigen::VectorXd> dP_dX_alt;  // per-root route, same quantity
  Eigen::VectorXd dP_dpi;                  // when sensitivities are supplied
  double p_smooth = 0.0;
  int n_samples = 0;
  int n_discarded = 0;
  double max_route_difference = 0.0;
};

/// Smooth probability estimate over the samples.
double smooth_probability(const chance::ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
                          const polychaos::SampleMatrix& samples, const GradConfig& cfg = {},
                          int* n_discarded = nullptr);

/// Sample-based probability gradient. sensitivities[t] is dX[t]/dpi
/// (length(X[t]) x n_pi); pass an empty vector to skip the chain rule.
GradResult gradient(const chance::ConstraintSet& cs, const std::vector<Eigen::VectorXd>& X,
                    const polychaos::SampleMatrix& samples,
                    const std::vector<Eigen::MatrixXd>& sensitivities = {},
                    const GradConfig& cfg = {});

}  // namespace pcmpc::ccgrad
