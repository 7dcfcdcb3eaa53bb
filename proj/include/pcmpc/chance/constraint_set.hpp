#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pcmpc/polychaos/expansion.hpp"

namespace pcmpc::chance {

/// coeff * prod x_state^power
struct ConstraintTerm {
  double coeff = 1.0;
  std::vector<std::pair<int, int>> powers;
};

/// g(x(t)) = constant + sum of terms, a polynomial in the state values at
/// one constraint time. Satisfied when g <= 0.
struct ConstraintFunction {
  int time = 0;
  double constant = 0.0;
  std::vector<ConstraintTerm> terms;

  int degree() const;
  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// dg/dx at the state values x.
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// scale * x_state + offset
  static ConstraintFunction affine(int time, int state, double scale, double offset);
};

/// Joint constraint set over state expansions. X is one stacked coefficient
/// vector (state-major, n_states * P~) per constraint time.
class ConstraintSet {
 public:
  ConstraintSet(polychaos::BasisPtr basis, int n_states);

  /// Index of a constraint time (existing times are reused).
  int add_time(double t);
  void add(ConstraintFunction g);

  int size() const { return static_cast<int>(g_.size()); }
  int n_states() const { return n_states_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<ConstraintFunction>& functions() const { return g_; }
  const polychaos::OrthoBasis& basis() const { return *basis_; }
  const polychaos::BasisPtr& basis_ptr() const { return basis_; }

  /// State values at xi for time index t.
  Eigen::VectorXd states_at(const std::vector<Eigen::VectorXd>& X, int t,
                            const Eigen::Ref<const Eigen::VectorXd>& psi) const;

  /// g_i(xi) for every constraint.
  Eigen::VectorXd eval(const std::vector<Eigen::VectorXd>& X,
                       const Eigen::Ref<const Eigen::VectorXd>& xi) const;

  /// Sample rows x constraints, given Psi rows of the samples.
  Eigen::MatrixXd eval_rows(const std::vector<Eigen::VectorXd>& X,
                            const Eigen::Ref<const Eigen::MatrixXd>& psi_rows) const;

  /// d g_i / d X[time(g_i)] at one sample (length n_states * P~).
  Eigen::VectorXd gradient(int i, const std::vector<Eigen::VectorXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& psi) const;

  void check(const std::vector<Eigen::VectorXd>& X) const;

 private:
  polychaos::BasisPtr basis_;
  int n_states_;
  std::vector<double> times_;
  std::vector<ConstraintFunction> g_;
};

}  // namespace pcmpc::chance
