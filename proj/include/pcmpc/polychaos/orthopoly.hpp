#pragma once

#include <cmath>
#include <limits>
#include <string_view>

#include <Eigen/Core>

namespace pcmpc::polychaos {

/// Standard random-variable families and their orthogonal polynomials.
///   Hermite  : xi ~ N(0,1),   probabilists' He_m, E[He_m^2] = m!
///   Legendre : xi ~ U(-1,1),  P_m on [-1,1],      E[P_m^2] = 1/(2m+1)
enum class Family { Hermite, Legendre };

std::string_view family_name(Family f);
Family family_from_name(std::string_view name);

/// Fills out[0..P] with phi_0(x)..phi_P(x) by the three-term recurrence.
template <class Scalar, class Out>
void eval_polys(Family f, int P, Scalar x, Out&& out) {
  out[0] = Scalar(1);
  if (P == 0) return;
  out[1] = x;
  for (int n = 1; n < P; ++n) {
    if (f == Family::Hermite)
      out[n + 1] = x * out[n] - Scalar(n) * out[n - 1];
    else
      out[n + 1] = (Scalar(2 * n + 1) * x * out[n] - Scalar(n) * out[n - 1]) / Scalar(n + 1);
  }
}

/// Fills dout[0..P] with phi_m'(x); needs the values from eval_polys.
template <class Scalar, class In, class Out>
void eval_poly_derivs(Family f, int P, const In& values, Out&& dout) {
  dout[0] = Scalar(0);
  if (P == 0) return;
  if (f == Family::Hermite) {
    for (int n = 1; n <= P; ++n) dout[n] = Scalar(n) * values[n - 1];
  } else {
    dout[1] = Scalar(1);
    for (int n = 1; n < P; ++n) dout[n + 1] = dout[n - 1] + Scalar(2 * n + 1) * values[n];
  }
}

inline double norm_squared(Family f, int m) {
  if (f == Family::Legendre) return 1.0 / (2.0 * m + 1.0);
  double r = 1.0;
  for (int k = 2; k <= m; ++k) r *= k;
  return r;
}

inline double support_lower(Family f) {
  return f == Family::Hermite ? -std::numeric_limits<double>::infinity() : -1.0;
}
inline double support_upper(Family f) {
  return f == Family::Hermite ? std::numeric_limits<double>::infinity() : 1.0;
}

/// Density of the standard variable.
inline double standard_pdf(Family f, double x) {
  if (f == Family::Hermite) return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return (x >= -1.0 && x <= 1.0) ? 0.5 : 0.0;
}

/// Cumulative distribution of the standard variable; handles +-inf.
inline double standard_cdf(Family f, double x) {
  if (f == Family::Hermite) return 0.5 * std::erfc(-x / std::sqrt(2.0));
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 * (x + 1.0);
}

/// Gauss rule for the probability measure of the family (weights sum to one).
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
GaussRule gauss_rule(Family f, int n_nodes);

}  // namespace pcmpc::polychaos
