#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pcmpc::ccgrad {

/// Dense univariate polynomial, ascending monomial coefficients.
struct Polynomial {
  Eigen::VectorXd c;

  int degree() const;  // -1 for the zero polynomial
  double operator()(double t) const;
  double derivative(double t) const;
  /// sum |c_k| |t|^k, the natural rounding scale of an evaluation at t.
  double scale(double t) const;
  double derivative_scale(double t) const;
};

/// Interpolate f (known to be a polynomial of degree <= degree) at degree+1
/// Chebyshev points of [-half_width, half_width].
Polynomial interpolate_chebyshev(const std::function<double(double)>& f, int degree,
                                 double half_width = 2.0);

struct RootResult {
  bool ok = true;
  std::string reason;          // set when !ok
  std::vector<double> roots;   // ascending, inside (lower, upper)
};

/// Real roots in the open interval (lower, upper) from the eigenvalues of the
/// balanced companion matrix, Newton polished. Not ok for repeated roots.
RootResult real_roots(const Polynomial& p, double lower, double upper, double root_tol = 1e-10,
                      double dedup_tol = 1e-8);

}  // namespace pcmpc::ccgrad
