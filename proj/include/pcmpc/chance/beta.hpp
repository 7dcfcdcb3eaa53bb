#pragma once

namespace pcmpc::chance {

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double betainc(double x, double a, double b);

/// Beta(a, b) density.
double beta_pdf(double x, double a, double b);

/// x with I_x(a, b) = p; bracketed Newton/bisection. Throws ConvergenceError
/// when the iteration cap is hit.
double beta_inv_cdf(double p, double a, double b);

}  // namespace pcmpc::chance
