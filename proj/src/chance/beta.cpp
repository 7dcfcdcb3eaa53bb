#include "pcmpc/chance/beta.hpp"

#include <cmath>
#include <limits>

#include "pcmpc/common/error.hpp"

namespace pcmpc::chance {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for I_x(a,b) (Numerical Recipes form), valid for
// x < (a+1)/(a+b+2).
double beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw ConvergenceError("betainc: continued fraction did not converge");
}

}  // namespace

double betainc(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DimensionError("betainc: shapes must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lfront = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(lfront) * beta_cf(x, a, b) / a;
  return 1.0 - std::exp(lfront) * beta_cf(1.0 - x, b, a) / b;
}

double beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) {
    if (x == 0.0 && a == 1.0) return b;
    if (x == 1.0 && b == 1.0) return a;
    return 0.0;
  }
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

double beta_inv_cdf(double p, double a, double b) {
  if (!(p > 0.0 && p < 1.0)) throw DimensionError("beta_inv_cdf: p must lie in (0,1)");
  if (!(a > 0.0) || !(b > 0.0)) throw DimensionError("beta_inv_cdf: shapes must be positive");
  double lo = 0.0, hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < 400; ++it) {
    const double f = betainc(x, a, b) - p;
    if (f == 0.0) return x;
    if (f < 0.0)
      lo = x;
    else
      hi = x;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1e-300)) return 0.5 * (lo + hi);
    const double pdf = beta_pdf(x, a, b);
    double next = pdf > 0.0 ? x - f / pdf : -1.0;
    // Fall back to bisection when Newton leaves the bracket or stalls.
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(x, 1e-300)) return next;
    x = next;
  }
  throw ConvergenceError("beta_inv_cdf: iteration cap reached");
}

}  // namespace pcmpc::chance
